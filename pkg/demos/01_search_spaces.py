"""
Mixed search spaces and the unit-cube warp
==========================================

Every optimizer in this package works on a fixed-length vector in the
unit cube. A SearchSpace describes the raw parameters (reals, integers,
booleans, categories) and provides the bijection between raw points and
cube coordinates.
"""

import numpy as np

from mixbo import ParamSpec, SearchSpace

# A parameter is a name, a kind, and kind-specific details. Reals and
# integers take inclusive bounds; a real may ask for a log-scale warp;
# categoricals list their labels.
space = SearchSpace(
    [
        ParamSpec("learning_rate", "real", lo=1e-4, hi=1.0, scale="log"),
        ParamSpec("depth", "integer", lo=1, hi=10),
        ParamSpec("schedule", "categorical", categories=("const", "cosine", "step")),
        ParamSpec("nesterov", "boolean"),
    ]
)
print("dimension:", space.dim)
print("names:", space.names)

# warp() maps a raw point to cube coordinates, unwarp() goes back.
point = {"learning_rate": 0.01, "depth": 7, "schedule": "cosine", "nesterov": True}
w = space.warp(point)
print("warped:", np.round(w, 4))
print("round trip:", space.unwarp(w))

# The log scale means equal cube distances are equal *ratios* of the
# learning rate: the midpoint of the cube axis is the geometric mean of
# the bounds, not the arithmetic one.
mid = space.unwarp(np.array([0.5, 0.5, 0.0, 0.0]))
print("cube midpoint learning rate:", round(mid["learning_rate"], 6))

# Integers and categories live on a lattice inside the cube. snap()
# projects arbitrary cube vectors onto that lattice, which is what the
# optimizer does to every candidate before evaluating it.
rng = np.random.default_rng(0)
raw = rng.random((3, space.dim))
snapped = space.snap(raw)
print("snapped rows stay snapped:", np.allclose(snapped, space.snap(snapped)))
for row in snapped:
    print("  lattice point ->", space.unwarp(row))

# The dimensions are grouped into three blocks by kind; the surrogate
# kernel treats each block with its own covariance, and booleans count
# as qualitative.
bl = space.blocks
print("real dims:", bl.x, "integer dims:", bl.y, "qualitative dims:", bl.z)

# Spaces serialize to plain dictionaries (and therefore JSON), which is
# how the command line and the wire protocol receive them.
from mixbo import space_from_dict

doc = space.to_dict()
print("serialized keys:", sorted(doc))
print("round trip dimension:", space_from_dict(doc).dim)
