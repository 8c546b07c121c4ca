"""Grid oracle checks: expansion agreement, grid halving and absorber doubling."""

import argparse
import dataclasses
import time

import numpy as np

from resdecay.decay import build_model, survival
from resdecay.oracle import GridConfig, compare_series, evolve


def run(label, model, cfg):
    start = time.perf_counter()
    res = evolve(model.spec, model.initial, cfg)
    print(f"{label}: {res.times.size} samples in {time.perf_counter() - start:.1f} s")
    return res


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--lifetimes", type=float, default=10.0)
    args = parser.parse_args()

    model = build_model()
    E1 = model.poles[0].resonance_energy
    total = args.lifetimes * model.tau
    base = GridConfig(total_time=total, record_every=10, reference_energy=E1)

    ref = run("base", model, base)
    rep = compare_series(survival(model.coeffs, ref.times), ref)
    print(f"expansion vs grid: max {rep.max_deviation:.3e}, rms {rep.rms_deviation:.3e}")

    short = dataclasses.replace(base, total_time=min(total, 2 * model.tau))
    fine = dataclasses.replace(short, dr=short.dr / 2, dt=short.dt / 2, record_every=20)
    a, b = run("coarse", model, short), run("fine", model, fine)
    print(f"grid halving: max |dS| = {np.max(np.abs(a.survival - b.survival)):.3e}")

    wide = run("doubled absorber", model, base.doubled_layer())
    print(f"absorber doubling: max |dS| = {np.max(np.abs(ref.survival - wide.survival)):.3e}")


if __name__ == "__main__":
    main()
