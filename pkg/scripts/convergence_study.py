"""Convergence study for the L1 forward solvers.

Solves each model under the smooth manufactured strain eps(t) = t^2,
for which closed-form (or Mittag-Leffler) reference stresses exist, and
reports the observed order as dt is halved.

Usage: python scripts/convergence_study.py [--t-end 1.0]
"""

import argparse
import math

import numpy as np

from fracrheo.l1solver import UniformGrid, step_fkv, step_fm, step_sb
from fracrheo.models import FKVParams, FMParams, SBParams
from fracrheo.specfun import gamma_fn, mittag_leffler


def d_alpha_t2(a):
    return lambda t: 2.0 * t ** (2.0 - a) / gamma_fn(3.0 - a)


def run_case(name, solver, params, exact, t_end, dts):
    errs = []
    for dt in dts:
        grid = UniformGrid(dt=dt, n_steps=int(round(t_end / dt)))
        t = grid.times()
        sigma = solver(params, t**2, grid)
        mask = t >= 0.2 * t_end
        errs.append(np.max(np.abs(sigma[mask] / exact(t[mask]) - 1.0)))
    print(f"{name:<14}", end="")
    for i, (dt, err) in enumerate(zip(dts, errs)):
        order = f"{math.log2(errs[i - 1] / err):.3f}" if i else "  -  "
        print(f"  dt={dt:<8g} err={err:.3e} p={order}", end="")
    print()


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--t-end", type=float, default=1.0)
    args = ap.parse_args()
    dts = (0.02, 0.01, 0.005)

    for a in (0.3, 0.5, 0.9):
        p = SBParams(E=2.0, alpha=a)
        f = d_alpha_t2(a)
        run_case(f"sb a={a}", step_sb, p, lambda t, f=f: p.E * f(t),
                 args.t_end, dts)

    fkv = FKVParams(E1=1.5, alpha1=0.25, E2=0.5, alpha2=0.7)
    f1, f2 = d_alpha_t2(fkv.alpha1), d_alpha_t2(fkv.alpha2)
    run_case("fkv", step_fkv, fkv,
             lambda t: fkv.E1 * f1(t) + fkv.E2 * f2(t), args.t_end, dts)

    fm = FMParams(E1=1.0, alpha1=0.2, E2=2.0, alpha2=0.8)
    lam, da = fm.E1 / fm.E2, fm.alpha2 - fm.alpha1

    def fm_exact(t):
        return np.array([
            2.0 * fm.E1 * ti ** (2.0 - fm.alpha1)
            * mittag_leffler(da, 3.0 - fm.alpha1, -lam * ti**da)
            for ti in t
        ])

    run_case("fm", step_fm, fm, fm_exact, args.t_end, dts)


if __name__ == "__main__":
    main()
