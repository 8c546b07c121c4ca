import csv
import io
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from resdecay import cli
from resdecay import poles as poles_mod
from resdecay.config import RunConfig, parse_lines, parse_segments
from resdecay.errors import ConfigError, IncompleteSearchError


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) if v not in ("true", "false") else v == "true" for v in r]
                              for r in rows[1:]], dtype=float)


# ---------------------------------------------------------------- config

def test_defaults_match_model():
    cfg = RunConfig()
    assert (cfg.potential_V, cfg.potential_w, cfg.potential_b) == (30.0, 1.0, 0.3)
    assert cfg.potential().cutoff == pytest.approx(1.3)
    assert cfg.box_width() == 1.0
    assert cfg.search_box() is None
    assert "tol.closure" in RunConfig.keys() and "potential.V" in RunConfig.keys()


def test_parse_text_with_comments():
    text = "# run\npoles.N = 40   # fewer poles\n\ntime.spacing = linear\ntime.min_lifetimes=0\nverify.oracle = off\n"
    cfg = RunConfig.from_text(text)
    assert cfg.poles_N == 40 and cfg.time_spacing == "linear"
    assert cfg.verify_oracle is False
    assert RunConfig.from_text(cfg.to_text()) == cfg


@pytest.mark.parametrize("text", [
    "poles.n = 3",
    "poles.N = 3\npoles.N = 4",
    "poles.N 3",
    "poles.N = three",
    "potential.V = inf",
    "verify.oracle = maybe",
])
def test_bad_text_rejected(text):
    with pytest.raises(ConfigError):
        RunConfig.from_text(text)


@pytest.mark.parametrize("kw", [
    dict(poles_N=0),
    dict(time_min_lifetimes=5.0, time_max_lifetimes=1.0),
    dict(ersak_T=0.0),
    dict(ersak_T_lifetimes=-1.0),
    dict(init_kind="gaussian"),
    dict(out_csv="a.out", out_svg="a.out"),
    dict(tol_oracle=0.0),
    dict(potential_b=0.0),
    dict(poles_box="1 2 3"),
    dict(time_spacing="cubic"),
])
def test_invalid_config(kw):
    with pytest.raises(ConfigError):
        RunConfig(**kw)


def test_parse_lines_and_segments():
    assert parse_lines(["a = 1", " # x", "b=2 # c"]) == {"a": "1", "b": "2"}
    spec = parse_segments("0:1:0, 1:1.3:30")
    assert spec == RunConfig().potential()
    with pytest.raises(ConfigError):
        parse_segments("0:1")
    with pytest.raises(ConfigError):
        parse_segments("0:1:0, 1.1:2:5")


def test_explicit_box_and_ersak_time():
    cfg = RunConfig(poles_box="0.01, 10, -6, 0", ersak_T_lifetimes=2.0)
    assert cfg.search_box().re_hi == 10.0
    assert cfg.ersak_time(3.0) == 6.0
    assert RunConfig().ersak_time(3.0) == 1000.0


def test_flags_override_file(tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("poles.N = 40\nersak.T = 500\ntime.points = 50\n")
    args = cli.build_parser().parse_args(["ersak", "--config", str(conf), "--N", "12", "--set", "time.points=20"])
    cfg = cli.config_from_args(args)
    assert cfg.poles_N == 12 and cfg.ersak_T == 500.0 and cfg.time_points == 20
    args = cli.build_parser().parse_args(["verify", "--no-oracle"])
    assert cli.config_from_args(args).verify_oracle is False


def test_help_documents_columns_and_keys(capsys):
    with pytest.raises(SystemExit):
        cli.main(["poles", "--help"])
    out = capsys.readouterr().out
    assert "re_kappa" in out and "ln_J_T" in out and "ratio_J_T_S_ne" in out
    assert "tol.oracle" in out and "Exit codes" in out


def test_fmt():
    assert cli.fmt(True) == "true" and cli.fmt(3) == "3"
    assert float(cli.fmt(0.1)) == 0.1
    assert len(cli.fmt(np.pi).split("e")[0].replace(".", "")) == 17
    assert cli.fmt(float("-inf")) == "-inf"


# ---------------------------------------------------------------- commands

def test_poles_command(tmp_path, capsys):
    out = tmp_path / "poles.csv"
    assert cli.main(["poles", "--N", "20", "--out-csv", str(out)]) == 0
    header, rows = read_csv(out)
    assert header == cli.COLUMNS["poles"]
    assert rows.shape == (20, 7)
    assert rows[0, 3] == pytest.approx(6.84, abs=0.02)
    assert rows[0, 4] == pytest.approx(0.352, abs=0.002)
    assert np.all(rows[:, 5] == 1) and np.all(rows[:, 6] < 1e-10)
    assert "pole 1" in capsys.readouterr().err


def test_poles_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.main(["poles", "--N", "30", "--out-csv", str(a)])
    cli.main(["poles", "--N", "30", "--out-csv", str(b)])
    raw = a.read_bytes()
    assert raw == b.read_bytes()
    assert b"\r" not in raw


def test_poles_stdout(capsys):
    assert cli.main(["poles", "--N", "2"]) == 0
    assert capsys.readouterr().out.startswith("n,re_kappa")


@pytest.mark.parametrize("argv", [
    ["poles", "--N", "0"],
    ["survival", "--set", "time.min_lifetimes=10", "--set", "time.max_lifetimes=1"],
    ["ersak", "--T", "0"],
    ["survival", "--out-csv", "x.out", "--out-svg", "x.out"],
    ["poles", "--set", "nonsense=1"],
    ["poles", "--config", "/nonexistent/run.conf"],
    ["poles", "--set", "poles.N"],
])
def test_configuration_errors_exit_2(argv, capsys):
    assert cli.main(argv) == 2
    assert "configuration error" in capsys.readouterr().err


def test_too_small_box_is_config_error():
    assert cli.main(["poles", "--N", "5", "--set", "poles.box=0.01 5 -2 0"]) == 2


def test_numerical_failure_exit_3(monkeypatch, capsys):
    def fail(*args, **kwargs):
        raise IncompleteSearchError("forced", 3, 1)
    monkeypatch.setattr(cli, "find_poles", fail)
    assert cli.main(["poles", "--N", "3"]) == 3
    assert "IncompleteSearchError" in capsys.readouterr().err


@pytest.fixture(scope="module")
def survival_csv(tmp_path_factory):
    d = tmp_path_factory.mktemp("surv")
    csv_path, svg_path = d / "s.csv", d / "s.svg"
    assert cli.main(["survival", "--out-csv", str(csv_path), "--out-svg", str(svg_path)]) == 0
    return read_csv(csv_path), svg_path


def test_survival_columns(survival_csv):
    (header, rows), _ = survival_csv
    assert header == cli.COLUMNS["survival"]
    assert rows[0, 0] == 0.0 and abs(rows[0, 2]) < 1e-3
    assert rows.shape[0] == 401


def test_survival_shape(survival_csv):
    (_, rows), _ = survival_csv
    x, lnS = rows[:, 1], rows[:, 2]
    expo = (x >= 5) & (x <= 15)
    assert np.polyfit(rows[expo, 0], lnS[expo], 1)[0] == pytest.approx(-0.3524698, rel=1e-2)
    late = (x >= 40) & (x <= 60)
    assert np.polyfit(np.log(rows[late, 0]), lnS[late], 1)[0] == pytest.approx(-3.0, abs=0.05)
    # the exponential and nonexponential curves cross near 28-30 lifetimes
    diff = rows[:, 3] - rows[:, 4]
    cross = x[1:][(diff[:-1] > 0) & (diff[1:] <= 0)]
    assert cross.size == 1 and 26 <= cross[0] <= 31


def test_ersak_below_nonexponential(survival_csv):
    (_, rows), _ = survival_csv
    sel = (rows[:, 1] >= 20) & (rows[:, 1] <= 60)
    assert np.all(rows[sel, 6] < rows[sel, 4])


def test_survival_svg(survival_csv):
    _, svg = survival_csv
    root = ET.parse(svg).getroot()
    assert root.tag.endswith("svg")
    lines = [el for el in root.iter() if el.tag.endswith("polyline")]
    assert len(lines) >= 4
    assert "ln J_T" in svg.read_text()


def test_ersak_command(tmp_path):
    out = tmp_path / "e.csv"
    assert cli.main(["ersak", "--out-csv", str(out), "--set", "time.points=100"]) == 0
    header, rows = read_csv(out)
    assert header == cli.COLUMNS["ersak"]
    assert rows[0, 0] == 0 and rows[0, 2] < 1e-6
    sel = (rows[:, 1] >= 20) & (rows[:, 1] <= 60)
    assert np.max(rows[sel, 3]) < 1e-2


def test_ersak_lifetimes_flag(tmp_path, capsys):
    out = tmp_path / "e.csv"
    assert cli.main(["ersak", "--N", "50", "--T-lifetimes", "350", "--out-csv", str(out),
                     "--set", "time.points=20"]) == 0
    assert "350.0000 lifetimes" in capsys.readouterr().err


def _report(text):
    return dict(line.split(" = ", 1) for line in text.strip().splitlines())


def test_verify_default_without_oracle(tmp_path):
    out = tmp_path / "v.txt"
    assert cli.main(["verify", "--no-oracle", "--out-csv", str(out)]) == 0
    rep = _report(out.read_text())
    assert rep["status"] == "pass" and "oracle_max_deviation" not in rep
    assert abs(float(rep["strength_deficit"])) < 1e-3
    for key in ("closure_l2_box", "closure_l2_smooth", "sum_rule_smeared_s1", "split_residual"):
        assert key in rep


def test_verify_single_pole_fails(capsys):
    assert cli.main(["verify", "--no-oracle", "--N", "1"]) == 1
    cap = capsys.readouterr()
    rep = _report(cap.out)
    assert float(rep["strength_deficit"]) == pytest.approx(0.101, abs=1e-3)
    assert "strength_deficit" in rep["failed"]
    assert "verification failed: strength_deficit" in cap.err


def test_verify_tolerance_override(capsys):
    assert cli.main(["verify", "--no-oracle", "--N", "40", "--set", "tol.split=1e-30"]) == 1
    assert "split_residual" in _report(capsys.readouterr().out)["failed"]


def test_write_output_rejects_directory(tmp_path):
    with pytest.raises(ConfigError):
        cli.write_output(str(tmp_path), "x")
    buf = io.StringIO()
    cli.write_output("", "hello\n", buf)
    assert buf.getvalue() == "hello\n"
