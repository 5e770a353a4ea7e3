"""
Edge lists and the command line
===============================

Real data arrive as weighted edge lists, ``layer source target weight``.
Edges below a weight threshold are dropped, as are self-loops.
"""

import subprocess
import sys
from pathlib import Path

import numpy as np

from mlnet import read_multiplex_edgelist

# %%
# Write a toy weighted edge list.  Weights are log-normal so a threshold
# removes a share of the edges.
rng = np.random.default_rng(0)
out = Path("demo_output")
out.mkdir(exist_ok=True)
path = out / "toy.edges"
with open(path, "w") as fh:
    for layer in range(4):
        for _ in range(1500):
            i, j = rng.integers(0, 60, 2)
            fh.write(f"{layer} {i} {j} {rng.lognormal(4, 1):.1f}\n")

net, report = read_multiplex_edgelist(path, min_weight=50)
print(net.n, "nodes,", net.L, "layers")
print(report)

# %%
# The same pipeline from the shell.
cmd = [sys.executable, "-m", "mlnet", "estimate", "--in", str(path), "--min-weight", "50",
       "--k-cand", "4", "--out", str(out / "traces")]
print(subprocess.run(cmd, capture_output=True, text=True).stdout)
