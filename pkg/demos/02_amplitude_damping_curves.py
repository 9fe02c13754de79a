# Max- and min-distance curves for a non-divisible amplitude-damping map
#
# The probe has lam = gamma0 = 4, so g = 4i and the horizontal axis is |g| t.
# Candidates are divisible members of the same family (same lam, gamma0
# drawn below lam / 2). With a sampled candidate set the curve is an upper
# estimate of the true measure.

import numpy as np

from nonmarkov import AmplitudeDampingFamily, SampleConfig, divisible_candidates, measure_curve
from nonmarkov.measures import curve_values
from nonmarkov.sampling import sample_states

probe = AmplitudeDampingFamily(4.0, 4.0)
cfg = SampleConfig(seed=2019, n_states=200, n_maps=200)
candidates = divisible_candidates(probe, cfg)
states = sample_states(cfg)

axis = np.linspace(0, 12, 25)
times = axis / probe.axis_scale()

n_max = curve_values(measure_curve(probe, times, candidates, states, mode="max"))
n_min = curve_values(measure_curve(probe, times, candidates, states, mode="min"))
n_cjks = curve_values(measure_curve(probe, times, candidates, mode="cjks"))

print(" gt/i     max       min       choi")
for row in zip(axis, n_max, n_min, n_cjks):
    print("%5.2f  %.6f  %.6f  %.6f" % row)

# min never exceeds max, since the min-distance uses the same pairs.
print("min <= max everywhere:", bool(np.all(n_min <= n_max + 1e-12)))
