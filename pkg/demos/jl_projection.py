"""Random projections preserve pairwise distances once m ~ eps^-2 log N."""

from hdp.ensembles import RngStream
from hdp.jl import JLConfig, choose_target_dim, jl_trial

cfg = JLConfig(eps=0.25, n=50, num_points=100, C_jl=8)
m0 = choose_target_dim(cfg)
print(f"N={cfg.num_points} points in R^{cfg.n}, eps={cfg.eps}: target dimension {m0}")
for m in (m0 // 16, m0 // 8, m0 // 4, m0 // 2, m0):
    reps = [jl_trial(cfg, m, RngStream(0).child(i)) for i in range(50)]
    ok = sum(r.within(cfg.eps) for r in reps)
    worst = max(max(r.max_expand, r.max_contract) for r in reps)
    print(f"m={m:4d}  within eps in {ok:2d}/50 seeds, worst distortion {worst:.3f}")
