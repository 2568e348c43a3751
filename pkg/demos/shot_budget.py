"""Shot ledgers of the sampled pipeline at the default 8192 shots x 1000 evaluations.

The frozen baseline doubles its cost with every frozen node; DO-QAOA pays for
one short representative run plus one final evaluation per transferred
sub-problem.
"""
import math

from doqaoa import (GraphEnsembleSpec, OptimizerConfig, PipelineConfig, generate, graph_hamiltonian, run_pipeline,
                    top_hotspots)

g = generate(GraphEnsembleSpec("erdos_renyi", 8, seed=1))
H = graph_hamiltonian(g, 0.5)
oc = OptimizerConfig(max_evals=1000, shots_per_eval=8192, mode="sampled")

plain = run_pipeline(H, (), PipelineConfig(m=0, mode="plain", optimizer=oc))
print(f"plain QAOA       : {plain.ledger.total_shots:>12,d} shots")
for m in (1, 2):
    fb = run_pipeline(H, top_hotspots(g, m), PipelineConfig(m=m, mode="frozen", optimizer=oc))
    print(f"frozen m={m}       : {fb.ledger.total_shots:>12,d} shots")
do = run_pipeline(H, top_hotspots(g, 1), PipelineConfig(m=1, optimizer=oc, rep_max_evals=10,
                                                        bias_threshold=math.inf))
print(f"DO-QAOA m=1      : {do.ledger.total_shots:>12,d} shots  {dict(do.ledger.shots)}")
