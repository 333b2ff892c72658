"""Tabulate the cusp indicators s(r) = (mean phi + ln r)/ln r and t(r) = (K - mu) ln r.

Log-polar evaluation lets r go far below the float range, which shows how
slowly s decays: roughly (ln|ln r| + const)/|ln r|.
"""

import math

import numpy as np

from hcmu import check_cusp, make_metric, make_params, realize_on_sphere
from hcmu.configs import CONFIG_A, CONFIG_B, CONFIG_C

EXPONENTS = (2, 4, 6, 10, 20, 40, 60, 100, 300, 1000)


def main():
    radii = [10.0**-k if k < 300 else None for k in EXPONENTS]
    print(f"{'r':>8} " + " ".join(f"{n:>16}" for n in ("A  s / t", "B  s / t", "C  s / t")))
    rows = {}
    for name, plan in (("A", CONFIG_A), ("B", CONFIG_B), ("C", CONFIG_C)):
        real = realize_on_sphere(plan)
        m = make_metric(real.form, make_params(real.form, Lambda=real.report.Lambda))
        finite = [r for r in radii if r is not None]
        rep = check_cusp(m, 0.0, finite)
        vals = list(zip(rep.s_values, rep.t_values))
        # radii below the float range: evaluate directly in log r
        k = m.form.pole_index(0.0)
        theta = 2 * np.pi * np.arange(128) / 128
        for e in EXPONENTS:
            if e >= 300:
                lr = -e * math.log(10)
                K, ls = m.log_scaled_factor_near_pole(k, np.full(128, lr), theta)
                vals.append((float(np.mean(0.5 * ls) / lr), float((K[0] - m.params.mu) * lr)))
        rows[name] = vals
    for i, e in enumerate(EXPONENTS):
        cells = " ".join(f"{rows[n][i][0]:7.4f}/{rows[n][i][1]:8.4f}" for n in "ABC")
        print(f"{'1e-' + str(e):>8} {cells}")


if __name__ == "__main__":
    main()
