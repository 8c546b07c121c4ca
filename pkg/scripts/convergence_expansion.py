"""Convergence of strength sum, closure and smeared sum rules with the number of poles."""

import argparse

import numpy as np

from resdecay.decay import build_model
from resdecay.poles import smeared_sum_rules, smooth_bump, sum_rule_partials, verify_closure


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--N", type=int, default=200)
    args = parser.parse_args()

    model = build_model(n_poles=args.N)
    a = model.spec.cutoff
    r = np.linspace(0.0, a, 1301)
    f_sup, g_sup = (0.15 * a, 0.7 * a), (0.3 * a, 0.85 * a)
    bump = smooth_bump(*f_sup)
    sm = smeared_sum_rules(model.states, bump, smooth_bump(*g_sup), f_sup, g_sup)
    point = sum_rule_partials(model.states, 0.5, 0.5)

    print("N,deficit,closure_box,closure_smooth,smeared_s1,smeared_s2,point_s1")
    for n in (1, 2, 5, 10, 20, 30, 40, 80, 120, 160, 200):
        if n > args.N:
            break
        c = model.coeffs.truncated(n)
        box = verify_closure(model.states[:n], model.initial, r).l2_error
        smooth = verify_closure(model.states[:n], bump, r).l2_error
        s1, s2 = sm.at(n)
        print(f"{n},{c.deficit:.3e},{box:.3e},{smooth:.3e},{s1:.3e},{s2:.3e},{point[n - 1]:.3e}")


if __name__ == "__main__":
    main()
