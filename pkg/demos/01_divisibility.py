# Divisibility of the two damping families
#
# Amplitude damping with a Lorentzian bath is divisible while lam > 2 gamma0.
# Past that point the decoherence function G(t) crosses zero and the decay
# rate blows up there. Phase damping at zero temperature loses divisibility
# only for super-Ohmic baths with s > 2, where the dephasing rate dips
# below zero at omega_c t = tan(pi / s).

import math

import numpy as np

from nonmarkov import AmplitudeDampingFamily, PhaseDampingFamily, is_divisible
from nonmarkov.channels import ad_pole_times, pd_dephasing_rate

# Sweep gamma0 at fixed lam and look at where divisibility breaks.

lam = 4.0
for gamma0 in [0.5, 1.0, 1.9, 2.1, 4.0, 10.0]:
    fam = AmplitudeDampingFamily(gamma0, lam)
    verdict = is_divisible(fam)
    print(f"AD gamma0={gamma0:5.2f}  divisible={verdict.divisible}  first violation={verdict.first_violation}")

# For lam = gamma0 = 4 the decoherence function is exp(-2t)(cos 2t + sin 2t),
# so the first pole of the rate sits at 3 pi / 8.

fam = AmplitudeDampingFamily(4.0, 4.0)
print("first pole", ad_pole_times(fam, 3.0)[0], "vs", 3 * math.pi / 8)

# Now the dephasing family.

for s in [0.5, 1.0, 1.5, 1.9, 2.1, 2.5, 2.8, 3.0]:
    fam = PhaseDampingFamily(s)
    print(f"PD s={s:3.1f}  divisible={is_divisible(fam).divisible}")

x = np.linspace(0, 3, 7)
print("s=2.5 rate on a coarse grid:", np.round(pd_dephasing_rate(PhaseDampingFamily(2.5), x), 4))
print("predicted zero at", math.tan(math.pi / 2.5))
