"""Empirical sub-gaussian and sub-exponential norms of the bundled ensembles."""

import math

from hdp.ensembles import KINDS, EnsembleSpec, RngStream, estimate_psi1, estimate_psi2, isotropy_check, sample_matrix

for kind in KINDS:
    x = sample_matrix(EnsembleSpec(kind, 10), 20_000, RngStream(0)).ravel()
    print(f"{kind:14s} psi2={estimate_psi2(x):.3f}  psi1(x^2)/psi2^2={estimate_psi1(x**2) / estimate_psi2(x) ** 2:.3f}")
print("gaussian reference psi2 =", round(math.sqrt(8 / 3), 3))

for kind in KINDS:
    err = isotropy_check(EnsembleSpec(kind, 10), 5000, RngStream(1))
    print(f"{kind:14s} ||sample second moment - I|| = {err:.3f}")
