"""
The ask/tell optimization loop
==============================

The Optimizer never calls your objective. You ask it for a batch of
points with suggest(), evaluate them however you like, and hand the
values back with observe(). This demo tunes a small mixed function and
inspects the diagnostics afterwards.
"""

import math

import numpy as np

from mixbo import OptimizerConfig, ParamSpec, SearchSpace, create

space = SearchSpace(
    [
        ParamSpec("x", "real", lo=-2.0, hi=2.0),
        ParamSpec("y", "real", lo=-2.0, hi=2.0),
        ParamSpec("ticks", "integer", lo=0, hi=8),
        ParamSpec("mode", "categorical", categories=("spiky", "smooth")),
    ]
)

# The minimum sits at (0.5, -0.5, 6, "smooth") with value 0.
def objective(p):
    penalty = 0.0 if p["mode"] == "smooth" else 0.7
    return (
        (p["x"] - 0.5) ** 2
        + (p["y"] + 0.5) ** 2
        + 0.05 * (p["ticks"] - 6) ** 2
        + penalty
    )

config = OptimizerConfig(batch_size=4, max_iterations=12, seed=1)
opt = create(space, config)

for it in range(config.max_iterations):
    points = opt.suggest()               # ask
    values = [objective(p) for p in points]
    opt.observe(points, values)          # tell
    best_point, best_value = opt.best()
    if it % 3 == 0 or it == config.max_iterations - 1:
        print(f"iter {it:2d}  best value {best_value:.4f}  at {best_point}")

# A NaN or infinite value would not crash the loop: it is imputed as
# +inf, counted, and a warning is emitted.
point, value = opt.best()
print("\nfinal best:", {k: (round(v, 3) if isinstance(v, float) else v) for k, v in point.items()})
print("final value:", round(value, 5), " (true optimum 0.0)")

diag = opt.diagnostics
interesting = ["iterations", "observations", "gp_fits", "arp_fits", "bandit_selects", "restarts", "tr_length"]
print("diagnostics:", {k: (round(diag[k], 3) if isinstance(diag[k], float) else diag[k]) for k in interesting})

# The three feature flags can be switched off independently; with all
# of them off the loop degrades to a plain trust-region search.
plain_cfg = OptimizerConfig(
    batch_size=4,
    max_iterations=12,
    seed=1,
    enable_arp=False,
    enable_mixture_kernel=False,
    enable_bandit=False,
)
plain = create(space, plain_cfg)
for _ in range(plain_cfg.max_iterations):
    pts = plain.suggest()
    plain.observe(pts, [objective(p) for p in pts])
print("plain trust-region best:", round(plain.best()[1], 5))
