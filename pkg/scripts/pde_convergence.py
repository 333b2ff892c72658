"""Curvature-equation residual against stencil spacing and distance from the singular set."""

import numpy as np

from hcmu import check_curvature_pde, make_metric, make_params, realize_on_sphere
from hcmu.configs import REFERENCE
from hcmu.verify import regular_points, singular_points


def main():
    for name, plan in REFERENCE.items():
        real = realize_on_sphere(plan)
        m = make_metric(real.form, make_params(real.form, Lambda=real.report.Lambda))
        pts = regular_points(m, 2000, 0.05, seed=0)
        d = np.min(np.abs(pts[:, None] - singular_points(m)), axis=1)
        print(f"== config {name}")
        print(f"{'dist band':>14} {'h=1e-3':>10} {'h=1e-4':>10} {'order':>7}")
        for lo, hi in ((0.05, 0.1), (0.1, 0.25), (0.25, 0.5), (0.5, np.inf)):
            sel = pts[(d >= lo) & (d < hi)]
            if len(sel) == 0:
                continue
            a = check_curvature_pde(m, sel, 1e-3)
            b = check_curvature_pde(m, sel, 1e-4)
            print(f"{lo:>6}-{hi:<7} {a.max_residual:10.2e} {b.max_residual:10.2e} {a.order:7.3f}")


if __name__ == "__main__":
    main()
