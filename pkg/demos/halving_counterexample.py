"""The halving inner sequence on |x| stalls the baseline but not tPLDCA.

For a few (theta, lambda) pairs this prints whether the baseline acceptance
test failed at every inner index and where the relaxed test first accepts.
"""

from tpldca import run_example_32

print(f"{'theta':>6} {'lambda':>7} {'zeta':>6}  baseline_stalls  accept_i  strict_i")
for theta, lam in ((1.0, 1.0), (0.5, 2.0), (3.0, 0.3)):
    for zeta in (1.0, 0.1, 0.01):
        r = run_example_32(theta, lam, 1000, zeta)
        print(f"{theta:6.2f} {lam:7.2f} {zeta:6.2f}  {str(r.baseline_failed_all):>15}  "
              f"{r.tpldca_accept_index!s:>8}  {r.strict_accept_index!s:>8}")
