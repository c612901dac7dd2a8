"""ISTA against the subgradient inner solver on random max-of-quadratics.

The subgradient solver gets a five-step outer budget; its inner counts grow
quickly as steps shrink.
"""

import time

import numpy as np

from tpldca import SolverConfig, criticality_residual, ista_solver, registry_get, subgradient_solver, tpldca_solve

rows = []
for seed in range(5):
    p = registry_get("rand_maxquad(4, 3)", seed=seed)
    for name, inner, cfg in (
        ("ista", ista_solver(), SolverConfig()),
        ("subgradient", subgradient_solver(), SolverConfig(max_outer=5)),
    ):
        t = time.perf_counter()
        tr = tpldca_solve(p, cfg, inner, np.zeros(4))
        secs = time.perf_counter() - t
        inner_total = sum(max(r.inner_iterations, 0) for r in tr.records)
        rows.append((seed, name, tr.status, len(tr.records), inner_total, tr.f_final, criticality_residual(p, tr.x_final), secs))

print(f"{'seed':>4} {'inner':>12} {'status':>14} {'outer':>5} {'sum_N_k':>9} {'f':>12} {'crit':>9} {'sec':>6}")
for r in rows:
    print(f"{r[0]:4d} {r[1]:>12} {r[2]:>14} {r[3]:5d} {r[4]:9d} {r[5]:12.6f} {r[6]:9.2e} {r[7]:6.3f}")
