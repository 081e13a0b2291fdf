"""Single trust region maintenance and quasirandom candidate generation.

The optimizer keeps one axis-aligned hyperrectangle inside the warped
unit cube, centered at the incumbent. The region doubles its base side
length after a run of improving batches and halves it after a run of
failing ones; when the length falls below a floor the region is
considered exhausted and the caller restarts it elsewhere. Candidate
points are drawn from a scrambled Sobol sequence inside the region, with
per-dimension sides weighted by the fitted Matern lengthscales, and are
sparsified so that each candidate differs from the center only in a
random subset of coordinates.

The Sobol generator is self-contained. It walks the sequence in Gray
code order using direction numbers shipped with the package (data file
``data/sobol-direction-numbers-v1.txt``), supports up to 64 dimensions,
and scrambles by XORing a per-dimension random 32-bit digital shift onto
every point, which permutes each dyadic interval without breaking the
low-discrepancy structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from .space import SearchSpace
from .surrogate import GpModel

_SOBOL_BITS = 32
_SOBOL_MAX_DIM = 64
_SOBOL_DATA = "sobol-direction-numbers-v1.txt"


class UnsupportedDimensionError(ValueError):
    """Requested Sobol dimension is outside the supported range."""


@dataclass(frozen=True)
class TrustRegionConfig:
    """Geometry and adaptation settings of the trust region.

    ``failure_tolerance``, ``n_candidates``, and ``perturbation_prob``
    default to None and are resolved against the space dimension and
    batch size with :meth:`resolve`; their defaults are
    ``max(4, ceil(D / batch_size))``, ``min(100 * D, 5000)``, and
    ``min(1, 20 / D)``.
    """

    length_init: float = 0.8
    length_max: float = 1.6
    length_min: float = 0.125
    success_tolerance: int = 3
    failure_tolerance: int | None = None
    n_candidates: int | None = None
    perturbation_prob: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.length_min < self.length_init <= self.length_max):
            raise ValueError(
                "need 0 < length_min < length_init <= length_max, got "
                f"{self.length_min}, {self.length_init}, {self.length_max}"
            )
        if self.success_tolerance < 1:
            raise ValueError("success_tolerance must be at least 1")
        if self.failure_tolerance is not None and self.failure_tolerance < 1:
            raise ValueError("failure_tolerance must be at least 1")
        if self.n_candidates is not None and self.n_candidates < 1:
            raise ValueError("n_candidates must be at least 1")
        if self.perturbation_prob is not None and not (0.0 < self.perturbation_prob <= 1.0):
            raise ValueError("perturbation_prob must lie in (0, 1]")

    def resolve(self, dim: int, batch_size: int) -> "TrustRegionConfig":
        """Fill dimension-dependent defaults for a concrete problem."""
        if dim < 1 or batch_size < 1:
            raise ValueError("dim and batch_size must be positive")
        return replace(
            self,
            failure_tolerance=(
                self.failure_tolerance
                if self.failure_tolerance is not None
                else max(4, math.ceil(dim / batch_size))
            ),
            n_candidates=(
                self.n_candidates if self.n_candidates is not None else min(100 * dim, 5000)
            ),
            perturbation_prob=(
                self.perturbation_prob
                if self.perturbation_prob is not None
                else min(1.0, 20.0 / dim)
            ),
        )


@dataclass(frozen=True)
class TrustRegionState:
    """Adaptation state. success_count and failure_count are never both positive."""

    center: np.ndarray | None
    length: float
    success_count: int
    failure_count: int
    best_value: float
    restarts: int


def new_state(config: TrustRegionConfig) -> TrustRegionState:
    """Fresh state with no center and no incumbent."""
    return TrustRegionState(
        center=None,
        length=config.length_init,
        success_count=0,
        failure_count=0,
        best_value=math.inf,
        restarts=0,
    )


def restarted(state: TrustRegionState, center: np.ndarray, config: TrustRegionConfig) -> TrustRegionState:
    """Reset geometry and incumbent at a new center, bumping the restart count."""
    return TrustRegionState(
        center=np.asarray(center, dtype=float).copy(),
        length=config.length_init,
        success_count=0,
        failure_count=0,
        best_value=math.inf,
        restarts=state.restarts + 1,
    )


def update_region(
    state: TrustRegionState,
    batch_best_value: float,
    batch_best_point: np.ndarray,
    config: TrustRegionConfig,
) -> TrustRegionState:
    """Advance the state by one observed batch.

    A batch is a success when its best value improves on the incumbent
    by more than a relative margin of ``1e-3 * |incumbent|``. A success
    recenters the region on the new incumbent and zeroes the failure
    run; reaching ``success_tolerance`` consecutive successes doubles
    the length (capped at ``length_max``). A failure zeroes the success
    run; reaching ``failure_tolerance`` consecutive failures halves the
    length. The length may fall below ``length_min``, which
    :func:`needs_restart` reports.

    Returns the updated state; the input state is not modified.
    """
    if math.isfinite(state.best_value):
        margin = 1e-3 * abs(state.best_value)
        improved = batch_best_value < state.best_value - margin
    else:
        improved = math.isfinite(batch_best_value)
    if improved:
        successes = state.success_count + 1
        state = replace(
            state,
            center=np.asarray(batch_best_point, dtype=float).copy(),
            best_value=float(batch_best_value),
            success_count=successes,
            failure_count=0,
        )
        if successes >= config.success_tolerance:
            state = replace(
                state,
                length=min(2.0 * state.length, config.length_max),
                success_count=0,
            )
    else:
        failures = state.failure_count + 1
        state = replace(state, failure_count=failures, success_count=0)
        if failures >= config.failure_tolerance:
            state = replace(state, length=state.length / 2.0, failure_count=0)
    return state


def needs_restart(state: TrustRegionState, config: TrustRegionConfig) -> bool:
    """True when the region has shrunk past its minimum length."""
    return state.length < config.length_min


def region_bounds(
    state: TrustRegionState, lengthscales: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned bounds of the region, clipped to the unit cube.

    Side i is ``state.length * lengthscales[i] / geometric_mean(lengthscales)``
    clipped to at most 1, so better-fitting (shorter) lengthscales narrow
    their dimensions while the region volume stays roughly controlled by
    ``state.length``. With no lengthscales every side is ``state.length``.
    """
    if state.center is None:
        raise ValueError("region has no center yet")
    center = np.asarray(state.center, dtype=float)
    d = center.shape[0]
    if lengthscales is None:
        weights = np.ones(d)
    else:
        ls = np.asarray(lengthscales, dtype=float)
        if ls.shape != (d,):
            raise ValueError(f"expected {d} lengthscales, got shape {ls.shape}")
        weights = ls / math.exp(float(np.mean(np.log(ls))))
    side = np.minimum(state.length * weights, 1.0)
    lo = np.clip(center - side / 2.0, 0.0, 1.0)
    hi = np.clip(center + side / 2.0, 0.0, 1.0)
    return lo, hi


# ---------------------------------------------------------------------------
# Sobol sequence


def _parse_direction_table(text: str) -> list[tuple[int, int, list[int]]]:
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [int(tok) for tok in line.split()]
        dim, s, a = parts[0], parts[1], parts[2]
        m = parts[3:]
        if len(m) != s:
            raise ValueError(f"direction table row for dimension {dim} is malformed")
        rows.append((dim, a, m))
    return rows


def _load_direction_vectors() -> np.ndarray:
    """Direction vectors V with shape (64, 32), scaled to the top bits."""
    text = resources.files("mixbo.data").joinpath(_SOBOL_DATA).read_text()
    table = _parse_direction_table(text)
    V = np.zeros((_SOBOL_MAX_DIM, _SOBOL_BITS), dtype=np.uint64)
    # First dimension: van der Corput in base 2.
    for k in range(_SOBOL_BITS):
        V[0, k] = np.uint64(1) << np.uint64(_SOBOL_BITS - 1 - k)
    expected = 2
    for dim, a, m in table:
        if dim != expected:
            raise ValueError("direction table rows must cover dimensions 2..64 in order")
        expected += 1
        s = len(m)
        row = np.zeros(_SOBOL_BITS, dtype=np.uint64)
        for k in range(min(s, _SOBOL_BITS)):
            row[k] = np.uint64(m[k]) << np.uint64(_SOBOL_BITS - 1 - k)
        for k in range(s, _SOBOL_BITS):
            prev = row[k - s]
            val = prev ^ (prev >> np.uint64(s))
            for i in range(1, s):
                if (a >> (s - 1 - i)) & 1:
                    val ^= row[k - i]
            row[k] = val
        V[dim - 1] = row
    if expected != _SOBOL_MAX_DIM + 1:
        raise ValueError("direction table must define dimensions up to 64")
    return V


_DIRECTION_CACHE: np.ndarray | None = None


def _direction_vectors() -> np.ndarray:
    global _DIRECTION_CACHE
    if _DIRECTION_CACHE is None:
        _DIRECTION_CACHE = _load_direction_vectors()
    return _DIRECTION_CACHE


def sobol_points(n: int, dim: int, seed: int | None = None) -> np.ndarray:
    """First n points of a (optionally scrambled) Sobol sequence.

    Parameters
    ----------
    n : int
        Number of points, at least 1.
    dim : int
        Dimension, between 1 and 64.
    seed : int, optional
        None returns the unscrambled sequence (first point at the
        origin). An integer seed applies a reproducible digital-shift
        scramble: one 32-bit mask per dimension is XORed onto every
        point, which preserves the low-discrepancy structure.

    Returns
    -------
    ndarray, shape (n, dim)
        Points in [0, 1).

    Notes
    -----
    Points are generated in Gray code order: point i flips a single
    direction vector, chosen by the index of the lowest zero bit of i.
    This yields the standard sequence but permuted within each block of
    2^k consecutive points, which leaves all dyadic balance properties
    intact.
    """
    if not 1 <= dim <= _SOBOL_MAX_DIM:
        raise UnsupportedDimensionError(f"dim must be in [1, {_SOBOL_MAX_DIM}], got {dim}")
    if n < 1:
        raise ValueError("n must be at least 1")
    V = _direction_vectors()[:dim]
    out = np.zeros((n, dim), dtype=np.uint64)
    state = np.zeros(dim, dtype=np.uint64)
    for i in range(1, n):
        # Gray code flips the vector indexed by the count of trailing
        # zeros of i (equivalently the lowest zero bit of i - 1).
        c = (i & -i).bit_length() - 1
        state = state ^ V[:, c]
        out[i] = state
    if seed is not None:
        rng = np.random.default_rng(seed)
        mask = rng.integers(0, 1 << _SOBOL_BITS, size=dim, dtype=np.uint64)
        out ^= mask
    return out.astype(np.float64) / float(1 << _SOBOL_BITS)


def generate_candidates(
    state: TrustRegionState,
    model: GpModel | None,
    space: SearchSpace,
    rng: np.random.Generator,
    config: TrustRegionConfig,
) -> np.ndarray:
    """Scrambled Sobol candidates inside the trust region.

    The region sides are weighted by the model's fitted Matern
    lengthscales (dimensions outside the x-block, which have no
    lengthscale, get weight 1). Each candidate keeps the center's value
    in every coordinate except a random subset: coordinates are
    perturbed independently with probability ``perturbation_prob``, and
    every candidate perturbs at least one coordinate.

    Parameters
    ----------
    state : TrustRegionState
        Must have a center.
    model : GpModel or None
        None means unit lengthscales everywhere.
    space : SearchSpace
    rng : numpy Generator
        Supplies the scramble seed and the perturbation mask.
    config : TrustRegionConfig
        Must be resolved (no None fields).

    Returns
    -------
    ndarray, shape (n_candidates, D)
        Points inside the region, hence inside the unit cube.
    """
    if config.n_candidates is None or config.perturbation_prob is None:
        raise ValueError("config must be resolved before generating candidates")
    d = space.dim
    ls_full = np.ones(d)
    if model is not None and model.blocks.x.size:
        ls_full[model.blocks.x] = model.params.lengthscales
    lo, hi = region_bounds(state, ls_full)
    n = config.n_candidates
    scramble_seed = int(rng.integers(0, 2**31))
    pts = sobol_points(n, d, seed=scramble_seed)
    cand = lo + pts * (hi - lo)
    mask = rng.random((n, d)) < config.perturbation_prob
    none_on = ~mask.any(axis=1)
    if np.any(none_on):
        forced = rng.integers(0, d, size=int(none_on.sum()))
        mask[np.nonzero(none_on)[0], forced] = True
    center = np.asarray(state.center, dtype=float)
    return np.where(mask, cand, center)
