"""Run tPLDCA with ISTA on the two-dimensional test problem and write its data.

Writes trace.csv, summary.json and inner series for k = 10, 30, 50 into the
output directory (default ./out/paper2d). Plot with any CSV tool.
"""

import sys

from tpldca.cli import main

out = sys.argv[1] if len(sys.argv) > 1 else "out/paper2d"
code = main([
    "solve", "--problem", "paper2d", "--x0", "2.5,1.5",
    "--sigma", "0.01", "--lambda", "1", "--theta", "1.1",
    "--max-outer", "51", "--record-inner", "--inner-k", "10,30,50",
    "--output-dir", out,
])
print(f"wrote {out} (exit {code})")
