"""Solution set of the relaxed subproblem for |x| as eps crosses 1."""

import numpy as np

from tpldca import ap_solution_set_abs

for eps in np.round(np.linspace(0.2, 2.0, 10), 2):
    print(f"eps = {eps:4.2f}: {ap_solution_set_abs(float(eps)).value}")
