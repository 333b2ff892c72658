"""Synthesize the reference configurations and print their audit tables.

    python3 scripts/audit_reference.py [--deep-cusp]
"""

import argparse

from hcmu import Tolerances, make_metric, make_params, realize_on_sphere, run_audit
from hcmu.configs import REFERENCE

DEEP = (1e-2, 1e-6, 1e-10, 1e-20, 1e-40, 1e-60)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--deep-cusp", action="store_true", help="probe cusps down to r = 1e-60")
    args = ap.parse_args()
    tol = Tolerances(cusp_radii=DEEP) if args.deep_cusp else Tolerances()
    for name, plan in REFERENCE.items():
        real = realize_on_sphere(plan)
        metric = make_metric(real.form, make_params(real.form, Lambda=real.report.Lambda))
        rep = run_audit(metric, tol)
        print(f"== config {name}: {'PASS' if rep.passed else 'FAIL'}")
        for c in rep.checks:
            keys = ("max_residual", "order", "max_rel_error", "alpha_estimated", "rel_error", "t_agreement")
            shown = ", ".join(f"{k}={c.detail[k]:.3g}" for k in keys if k in c.detail)
            if "s" in c.detail:
                shown += f", s(r_min)={c.detail['s'][-1]:.3f}"
            print(f"   {'ok ' if c.passed else 'BAD'} {c.name:<22} {shown}")


if __name__ == "__main__":
    main()
