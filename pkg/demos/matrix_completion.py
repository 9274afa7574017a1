"""Recover a low-rank matrix from a random subset of its entries."""

import numpy as np

from hdp.completion import CompletionInstance, low_rank_generator
from hdp.ensembles import RngStream

n, r = 100, 2
for m in (1000, 2000, 5000, 8000):
    res = []
    for i in range(10):
        gen = RngStream(0).child(i).generator()
        res.append(CompletionInstance(low_rank_generator(n, r, gen), r, m).run(gen))
    rmse = np.mean([x.per_entry_rmse for x in res])
    print(f"m={m:5d} observed entries  per-entry RMSE {rmse:.4f}  bound {res[0].theory_bound:.3f}")
