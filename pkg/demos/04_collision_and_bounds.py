# epsilon-Markovian maps from a collision model, and the entanglement bound
#
# A system qubit meets a fresh |0> ancilla at every step. The first
# collision makes alpha|00> + sqrt(1 - alpha^2)|11>, with alpha chosen so the
# mutual information is exactly epsilon; afterwards the interaction strength
# is tuned down whenever needed to keep it below epsilon.

import numpy as np

from nonmarkov import AmplitudeDampingFamily, SampleConfig, divisible_candidates, measure_curve
from nonmarkov.bounds import CollisionModel, run_collision_model, solve_alpha, verify_bound
from nonmarkov.sampling import sample_states

for eps in (0.0, 0.5, 1.0, 2.0):
    trace = run_collision_model(CollisionModel(eps), 100)
    print(f"eps={eps}: alpha={solve_alpha(eps):.6f}  max I_Q={trace.mutual_information.max():.3e}")

# The bound N <= E + d along the amplitude-damping curve. E is certified
# from below by a partial-transpose witness, d = 2 for the trace distance.

probe = AmplitudeDampingFamily(4.0, 4.0)
cfg = SampleConfig(seed=2019, n_states=200, n_maps=200)
times = np.linspace(0, 12, 13) / probe.axis_scale()
results = measure_curve(probe, times, divisible_candidates(probe, cfg), sample_states(cfg))
for t, r in zip(times, results):
    rep = verify_bound(probe, t, r)
    print(f"t={t:5.3f}  N={rep.N:.4f}  E>={rep.E:.4f}  d={rep.d:.0f}  slack={rep.slack:.4f}")
