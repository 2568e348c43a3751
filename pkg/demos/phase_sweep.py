"""Small replica-overlap sweep over the LRP decay exponent s.

For each s, draws long-range percolation graphs, freezes the top-degree 10%
of nodes in 8 random configurations and reports the mean cosine overlap of
their standardized p=1 landscapes. Larger s means shorter-range edges and
more similar landscapes.
"""
import numpy as np

from doqaoa.landscape import GridSpec, replica_overlap_experiment

spec = GridSpec(resolution=(16, 16))
print("  s    " + "  ".join(f"L={L:<4d}" for L in (50, 100)))
for s in np.round(np.arange(0.2, 2.01, 0.3), 1):
    qs = [replica_overlap_experiment(L, s, M=8, n_graphs=10, spec=spec, frozen_fraction=0.1, seed=1).mean
          for L in (50, 100)]
    print(f"{s:4.1f}   " + "  ".join(f"{q:.3f} " for q in qs))
