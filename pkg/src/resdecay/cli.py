"""Command-line front end: ``resdecay {poles,survival,verify,ersak}``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from . import decay
from .config import RunConfig
from .errors import ConfigError, InvalidParameterError, ResdecayError
from .oracle import compare, evolve
from .poles import find_poles, smeared_sum_rules, smooth_bump, sum_rule_partials, verify_closure
from .potential import jost_outgoing
from .svg import Curve, line_plot

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

COLUMNS = {
    "poles": ["n", "re_kappa", "im_kappa", "energy", "width", "proper", "abs_jost"],
    "survival": ["t", "t_over_tau", "ln_S", "ln_S_e", "ln_S_ne", "cross", "ln_J_T"],
    "ersak": ["t", "t_over_tau", "J_T", "ratio_J_T_S_ne"],
}

EPILOG = """\
CSV columns
  poles:    n, re_kappa, im_kappa, energy, width, proper, abs_jost
  survival: t, t_over_tau, ln_S, ln_S_e, ln_S_ne, cross, ln_J_T
  ersak:    t, t_over_tau, J_T, ratio_J_T_S_ne
verify prints 'key = value' lines and exits 1 naming any failing key.

Exit codes: 0 ok, 1 verification failure, 2 configuration error, 3 numerical failure.
Configuration keys (file lines 'key = value', '#' comments, or --set key=value):
  """ + ", ".join(RunConfig.keys())


def fmt(value) -> str:
    """17 significant digits in scientific notation; integers and flags verbatim."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if np.isnan(v):
        return "nan"
    if np.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.16e}"


def csv_text(header: Sequence[str], rows) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_output(path: str, text: str, stream=None):
    """Write ``text`` atomically to ``path``, or to ``stream`` when no path is given."""
    if not path:
        (stream or sys.stdout).write(text)
        return
    target = Path(path)
    if target.is_dir():
        raise ConfigError(f"output path {path} is a directory")
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        mask = os.umask(0)
        os.umask(mask)
        os.chmod(tmp, 0o666 & ~mask)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _log(value):
    with np.errstate(divide="ignore"):
        return np.log(value)


# --------------------------------------------------------------------------
# model assembly

def _model(cfg: RunConfig) -> decay.DecayModel:
    spec = cfg.potential()
    initial = decay.InitialState.quantum_box(cfg.box_width())
    if initial.support[1] > spec.cutoff:
        raise ConfigError("quantum box extends beyond the potential cutoff")
    box = cfg.search_box()
    model = decay.build_model(spec, cfg.poles_N, initial, box)
    if len(model.poles) < cfg.poles_N:
        raise ConfigError(f"search box holds {len(model.poles)} poles, fewer than poles.N = {cfg.poles_N}")
    return model


def _grid(cfg: RunConfig, tau: float, with_zero: bool = True) -> np.ndarray:
    t = decay.time_grid(tau, cfg.time_min_lifetimes, cfg.time_max_lifetimes, cfg.time_points, cfg.time_spacing)
    if with_zero and t[0] > 0:
        t = np.concatenate([[0.0], t])
    return t


# --------------------------------------------------------------------------
# commands

def cmd_poles(cfg: RunConfig, err=None) -> int:
    err = err or sys.stderr
    spec = cfg.potential()
    poles = find_poles(spec, cfg.poles_N, cfg.search_box())
    if len(poles) < cfg.poles_N:
        raise ConfigError(f"search box holds {len(poles)} poles, fewer than poles.N = {cfg.poles_N}")
    poles = poles[: cfg.poles_N]
    rows = [(p.n, p.kappa.real, p.kappa.imag, p.resonance_energy, p.width, p.proper,
             abs(jost_outgoing(spec, p.kappa))) for p in poles]
    write_output(cfg.out_csv, csv_text(COLUMNS["poles"], rows))
    p1 = poles[0]
    err.write(f"pole 1: kappa = {p1.kappa.real:.10f}{p1.kappa.imag:+.10f}i  "
              f"E = {p1.resonance_energy:.6f}  Gamma = {p1.width:.6f}  ({len(poles)} poles)\n")
    return EXIT_OK


def survival_table(cfg: RunConfig, model: decay.DecayModel):
    c = model.coeffs
    t = _grid(cfg, model.tau)
    series = decay.survival(c, t)
    T = cfg.ersak_time(model.tau)
    J = decay.ersak(c, t, T).J
    return series, J, T


def cmd_survival(cfg: RunConfig, err=None) -> int:
    err = err or sys.stderr
    model = _model(cfg)
    series, J, T = survival_table(cfg, model)
    rows = zip(series.t, series.t_lifetimes, _log(series.S), _log(series.S_e), _log(series.S_ne),
               series.cross, _log(J))
    write_output(cfg.out_csv, csv_text(COLUMNS["survival"], rows))
    if cfg.out_svg:
        x = series.t_lifetimes
        curves = [Curve("ln S", x, _log(series.S)),
                  Curve("ln S_e", x, _log(series.S_e), "6,3"),
                  Curve("ln S_ne", x, _log(series.S_ne), "2,2"),
                  Curve(f"ln J_T (T={T:g})", x, _log(J), "8,3,2,3")]
        floor = float(np.nanmin(_log(series.S)[np.isfinite(_log(series.S))])) - 10.0
        write_output(cfg.out_svg, line_plot(curves, "t / tau", "ln", "survival probability", y_floor=floor))
    try:
        tr = decay.transition_time(model.coeffs)
        err.write(f"tau = {model.tau:.8f}  crossing t0/tau = {tr.t0_lifetimes:.4f}  "
                  f"formula tau0 = {tr.tau0_formula:.4f} (R = {tr.R:.4f})\n")
    except ResdecayError as exc:
        err.write(f"no crossing found: {exc}\n")
    return EXIT_OK


def cmd_ersak(cfg: RunConfig, err=None) -> int:
    err = err or sys.stderr
    model = _model(cfg)
    c = model.coeffs
    t = _grid(cfg, model.tau)
    T = cfg.ersak_time(model.tau)
    J = decay.ersak(c, t, T).J
    S_ne = decay.survival(c, t).S_ne
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = J / S_ne
    write_output(cfg.out_csv, csv_text(COLUMNS["ersak"], zip(t, t / model.tau, J, ratio)))
    err.write(f"T = {T:.8g} ({T / model.tau:.4f} lifetimes)\n")
    return EXIT_OK


def verification_report(cfg: RunConfig) -> tuple[list[tuple[str, object]], list[str]]:
    """Ordered report entries and the keys that breach their tolerance."""
    model = _model(cfg)
    c, states = model.coeffs, model.states
    spec = model.spec
    a = spec.cutoff
    report: list[tuple[str, object]] = []
    failed: list[str] = []

    def gate(key, value, tol):
        report.append((key, value))
        if not abs(value) < tol:
            failed.append(key)

    report.append(("n_poles", c.N))
    gate("strength_deficit", c.deficit, cfg.tol_strength)
    gate("sum_rule_weights", c.sum_rule_residual(), cfg.tol_sum_rule)

    n_cl = min(cfg.verify_closure_N, c.N)
    r_grid = np.linspace(0.0, a, 1301)
    U = np.array([st(r_grid) for st in states[:n_cl]])
    recon = (c.C[:n_cl, None] * U).real.sum(axis=0)
    err_box = recon - model.initial(r_grid)
    report.append(("closure_N", n_cl))
    gate("closure_l2_box", float(np.sqrt(np.trapezoid(err_box**2, r_grid))), cfg.tol_closure_box)
    f_sup, g_sup = (0.15 * a, 0.7 * a), (0.3 * a, 0.85 * a)
    gate("closure_l2_smooth", verify_closure(states[:n_cl], smooth_bump(*f_sup), r_grid).l2_error,
         cfg.tol_closure)

    # pointwise sums only converge in the distributional sense: reported, not gated
    r_mid = 0.5 * spec.segments[0].r_hi
    report.append(("sum_rule_point_r", r_mid))
    report.append(("sum_rule_point_s1", float(sum_rule_partials(states, r_mid, r_mid)[-1])))
    s1, s2 = smeared_sum_rules(states, smooth_bump(*f_sup), smooth_bump(*g_sup), f_sup, g_sup).at(c.N)
    gate("sum_rule_smeared_s1", s1, cfg.tol_sum_rule)
    gate("sum_rule_smeared_s2", s2, cfg.tol_sum_rule_s2)

    t = _grid(cfg, model.tau, with_zero=False)
    series = decay.survival(c, t)
    gate("split_residual", float(np.max(np.abs(decay.amplitude_direct(c, t) - series.A))), cfg.tol_split)
    gate("survival_t0_deviation", abs(decay.survival(c, [0.0]).S[0] - 1.0), cfg.tol_strength)

    if cfg.verify_oracle:
        total = cfg.oracle_max_lifetimes * model.tau
        p1 = model.poles[0]
        grid = dataclasses.replace(cfg.grid(p1.resonance_energy, total), record_every=10)
        res = evolve(spec, model.initial, grid)
        S_exp = decay.survival(c, res.times).S
        cmp = compare(res.times, S_exp, res.times, res.survival)
        gate("oracle_max_deviation", cmp.max_deviation, cfg.tol_oracle)
    return report, failed


def cmd_verify(cfg: RunConfig, err=None) -> int:
    err = err or sys.stderr
    report, failed = verification_report(cfg)
    lines = [f"{k} = {fmt(v)}" for k, v in report]
    lines.append(f"status = {'fail' if failed else 'pass'}")
    if failed:
        lines.append(f"failed = {','.join(failed)}")
    write_output(cfg.out_csv, "\n".join(lines) + "\n")
    for key in failed:
        err.write(f"verification failed: {key}\n")
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {"poles": cmd_poles, "survival": cmd_survival, "verify": cmd_verify, "ersak": cmd_ersak}


# --------------------------------------------------------------------------
# argument handling

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="resdecay", description=__doc__.splitlines()[0], epilog=EPILOG,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__name__.replace("cmd_", "") + " command", epilog=EPILOG,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one configuration key (repeatable)")
        p.add_argument("--N", dest="poles.N", help="number of poles")
        p.add_argument("--out-csv", dest="out.csv", help="CSV (or report) output path; stdout if omitted")
        p.add_argument("--out-svg", dest="out.svg", help="SVG plot output path (survival)")
        p.add_argument("--T", dest="ersak.T", help="Ersak time T in natural units")
        p.add_argument("--T-lifetimes", dest="ersak.T_lifetimes", help="Ersak time T in lifetimes (overrides --T)")
        p.add_argument("--no-oracle", action="store_true", help="skip the grid oracle in verify")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values: dict[str, str] = {}
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        values[key.strip()] = value.strip()
    for key in ("poles.N", "out.csv", "out.svg", "ersak.T", "ersak.T_lifetimes"):
        value = getattr(args, key)
        if value is not None:
            values[key] = value
    if args.no_oracle:
        values["verify.oracle"] = "false"
    base = RunConfig.from_file(args.config) if args.config else None
    return RunConfig.from_mapping(values, base)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, InvalidParameterError) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG
    except (ResdecayError, ArithmeticError) as exc:
        sys.stderr.write(f"numerical failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
