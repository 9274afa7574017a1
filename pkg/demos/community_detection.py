"""Spectral clustering of a two-community stochastic block model."""

from hdp.ensembles import RngStream
from hdp.linalg import operator_norm
from hdp.networks import (
    SBMParams,
    concentration_scale,
    expected_adjacency,
    misclassification_rate,
    sample_sbm,
    spectral_cluster,
)

for p, q in ((1 / 20, 1 / 200), (0.04, 0.01), (0.03, 0.02), (0.025, 0.025)):
    params = SBMParams(200, p, q)
    EA = expected_adjacency(params)
    rates, ratios = [], []
    for i in range(50):
        A, labels, _ = sample_sbm(params, RngStream(0).child(i))
        rates.append(misclassification_rate(spectral_cluster(A), labels))
        ratios.append(operator_norm(A - EA) / concentration_scale(params))
    print(
        f"p={p:.4f} q={q:.4f}  recovery condition {params.recovery_condition():6.2f}  "
        f"mean misclassification {sum(rates) / len(rates):.3f}  max ||A-EA||/scale {max(ratios):.3f}"
    )
