"""
Sampling a planted multi-layer network
======================================

Draw a directed multi-layer network with 3 sender and 5 receiver
communities and look at what the generator produced.
"""

import numpy as np

from mlnet import GeneratorConfig, simulate

cfg = GeneratorConfig(n=300, L=10, K_s=3, K_r=5, rho=0.2, seed=1)
pm = simulate(cfg)
net = pm.network

print("layers, nodes:", net.L, net.n)
print("sender sizes:  ", pm.sender.sizes())
print("receiver sizes:", pm.receiver.sizes())

# %%
# Each layer has its own 3 x 5 block matrix.  Strong cells sit on the
# diagonal, medium cells one step to the right of it (wrapping around),
# and the rest are weak.  Everything is scaled by rho.
np.set_printoptions(precision=3, suppress=True)
print(pm.blocks.blocks[0])

# %%
# Observed density per layer against the expected density.
expected = pm.blocks.blocks.mean(axis=(1, 2))
observed = net.layers.mean(axis=(1, 2)) * net.n / (net.n - 1)
for ell in range(3):
    print(f"layer {ell}: observed {observed[ell]:.4f}  block mean {expected[ell]:.4f}")
