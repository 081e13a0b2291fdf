"""Gaussian-process surrogate with a mixture kernel for mixed variables.

The kernel treats the three blocks of a warped vector differently. With
x the real block, y the integer block, and z the qualitative block, the
covariance between two warped vectors h and h' is

    k(h, h') = (1 - lam) * (k_M(x, x') + k_L(y, y') + k_I(z, z'))
               + lam * k_M(x, x') * k_L(y, y') * k_I(z, z')

where k_M is a Matern covariance with smoothness 5/2 and per-dimension
lengthscales, k_L is the linear covariance v * y.y' with v fixed at 1,
and k_I averages per-dimension indicator matches. An absent block drops
out of the sum and contributes a factor of 1 to the product, so a purely
continuous space reduces to the plain Matern kernel. The mixing weight
lam is a kernel hyperparameter on a small grid.

Targets are standardized internally before fitting. Hyperparameters are
chosen by maximizing the log marginal likelihood with a deterministic
multi-start coordinate search under a hard budget of likelihood
evaluations, so fits are reproducible and their cost is bounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .space import Blocks, SearchSpace

SQRT5 = math.sqrt(5.0)

#: Floor applied to the target standard deviation before standardizing.
STD_FLOOR = 1e-8

#: Fallbacks used when a fit is skipped and as the first search start.
DEFAULT_LENGTHSCALE = 0.5
DEFAULT_SIGNAL_VARIANCE = 1.0
DEFAULT_NOISE_VARIANCE = 1e-3


class NumericalError(RuntimeError):
    """The kernel matrix stayed non positive definite after jitter escalation."""


@dataclass(frozen=True)
class KernelParams:
    """Hyperparameters of the mixture kernel.

    Parameters
    ----------
    lengthscales : ndarray
        One positive Matern lengthscale per x-block dimension (warped units).
    signal_variance : float
        Matern output variance, positive.
    lam : float
        Mixing weight between the sum and product composition, in [0, 1].
    noise_variance : float
        Observation noise added to the Gram diagonal, at least 1e-8.
    nu : float
        Matern smoothness, fixed at 2.5.
    v : float
        Linear-kernel variance, fixed at 1.0.
    """

    lengthscales: np.ndarray
    signal_variance: float = DEFAULT_SIGNAL_VARIANCE
    lam: float = 0.5
    noise_variance: float = DEFAULT_NOISE_VARIANCE
    nu: float = 2.5
    v: float = 1.0

    def __post_init__(self) -> None:
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        object.__setattr__(self, "lengthscales", ls)
        if ls.size and not np.all(ls > 0):
            raise ValueError("lengthscales must be positive")
        if not self.signal_variance > 0:
            raise ValueError("signal_variance must be positive")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must lie in [0, 1]")
        if not self.noise_variance >= 1e-8:
            raise ValueError("noise_variance must be at least 1e-8")


@dataclass(frozen=True)
class SurrogateConfig:
    """Fit-time settings.

    The bounds are in warped units and the lengthscale and variance
    coordinates are searched on a log scale. ``lambda_grid`` lists the
    admissible mixing weights. ``indicator`` selects how the z-block
    kernel combines dimensions: ``"mean"`` averages per-dimension
    matches, ``"strict"`` requires the whole block to match.
    ``linear_on_raw`` feeds raw integer values instead of warped
    coordinates to the linear kernel. ``max_fit_evals`` caps the number
    of marginal-likelihood evaluations per fit.
    """

    lengthscale_bounds: tuple[float, float] = (5e-3, 2.0)
    signal_bounds: tuple[float, float] = (0.05, 20.0)
    noise_bounds: tuple[float, float] = (1e-6, 1e-2)
    lambda_grid: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    indicator: str = "mean"
    linear_on_raw: bool = False
    max_fit_evals: int = 2000
    n_sweeps: int = 2

    def __post_init__(self) -> None:
        for name in ("lengthscale_bounds", "signal_bounds", "noise_bounds"):
            lo, hi = getattr(self, name)
            if not (0 < lo < hi):
                raise ValueError(f"{name} must satisfy 0 < lo < hi")
        if self.indicator not in ("mean", "strict"):
            raise ValueError('indicator must be "mean" or "strict"')
        if not self.lambda_grid or any(not 0 <= g <= 1 for g in self.lambda_grid):
            raise ValueError("lambda_grid entries must lie in [0, 1]")
        if self.max_fit_evals < 10:
            raise ValueError("max_fit_evals too small to fit anything")


# ---------------------------------------------------------------------------
# kernel primitives


def matern52(x: np.ndarray, x2: np.ndarray, lengthscales: np.ndarray, signal_variance: float = 1.0) -> float:
    """Matern covariance with smoothness 5/2 between two real vectors.

    Uses the closed form
    ``s * (1 + sqrt(5) d + 5 d^2 / 3) * exp(-sqrt(5) d)`` with
    ``d`` the lengthscale-weighted Euclidean distance.

    Parameters
    ----------
    x, x2 : ndarray
        Vectors of equal length.
    lengthscales : ndarray or float
        Positive lengthscale per dimension (broadcast if scalar).
    signal_variance : float
        Output variance s.

    Returns
    -------
    float
        Covariance value in (0, signal_variance], equal to
        signal_variance when x == x2.
    """
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    d = math.sqrt(float(np.sum(((x - x2) / lengthscales) ** 2)))
    return signal_variance * (1.0 + SQRT5 * d + 5.0 * d * d / 3.0) * math.exp(-SQRT5 * d)


def linear_kernel(y: np.ndarray, y2: np.ndarray, v: float = 1.0) -> float:
    """Linear covariance v * <y, y2>. Empty inputs give 0."""
    y = np.asarray(y, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    return float(v * np.dot(y, y2))


def indicator_kernel(z: np.ndarray, z2: np.ndarray, mode: str = "mean") -> float:
    """Match score of two qualitative blocks.

    ``mode="mean"`` returns the fraction of dimensions with equal values;
    ``mode="strict"`` returns 1.0 only when every dimension matches.
    Empty blocks count as a perfect match.
    """
    z = np.asarray(z)
    z2 = np.asarray(z2)
    if z.size == 0:
        return 1.0
    eq = z == z2
    if mode == "strict":
        return 1.0 if bool(np.all(eq)) else 0.0
    return float(np.mean(eq))


def mixture_kernel(
    h: np.ndarray,
    h2: np.ndarray,
    params: KernelParams,
    blocks: Blocks,
    indicator: str = "mean",
) -> float:
    """Mixture covariance between two warped vectors.

    The sum part adds the kernels of the blocks that are present; the
    product part multiplies them, with absent blocks contributing a
    factor of 1. With only an x-block present the result reduces to the
    plain Matern covariance for every value of ``params.lam``.

    Parameters
    ----------
    h, h2 : ndarray
        Full warped vectors (all blocks interleaved).
    params : KernelParams
        Hyperparameters; ``lengthscales`` must match the x-block size.
    blocks : Blocks
        Index arrays selecting each block out of h.
    indicator : str
        z-block combination mode, see SurrogateConfig.

    Returns
    -------
    float
    """
    h = np.asarray(h, dtype=float)
    h2 = np.asarray(h2, dtype=float)
    terms = []
    prod = 1.0
    if blocks.x.size:
        km = matern52(h[blocks.x], h2[blocks.x], params.lengthscales, params.signal_variance)
        terms.append(km)
        prod *= km
    if blocks.y.size:
        kl = linear_kernel(h[blocks.y], h2[blocks.y], params.v)
        terms.append(kl)
        prod *= kl
    if blocks.z.size:
        ki = indicator_kernel(h[blocks.z], h2[blocks.z], indicator)
        terms.append(ki)
        prod *= ki
    return (1.0 - params.lam) * sum(terms) + params.lam * prod


def mixture_gram(
    inputs: np.ndarray,
    inputs2: np.ndarray | None,
    params: KernelParams,
    blocks: Blocks,
    indicator: str = "mean",
) -> np.ndarray:
    """Mixture covariance matrix between two sets of warped vectors.

    Equivalent to evaluating :func:`mixture_kernel` on every pair, but
    assembled blockwise in vector form. Pass ``inputs2=None`` for the
    square Gram of one set.

    Parameters
    ----------
    inputs : ndarray, shape (n, D)
    inputs2 : ndarray, shape (m, D), optional
    params : KernelParams
    blocks : Blocks
    indicator : str

    Returns
    -------
    ndarray, shape (n, m)
    """
    A = np.atleast_2d(np.asarray(inputs, dtype=float))
    B = A if inputs2 is None else np.atleast_2d(np.asarray(inputs2, dtype=float))
    return _mixture_gram(
        A[:, blocks.x],
        B[:, blocks.x],
        A[:, blocks.y],
        B[:, blocks.y],
        None,
        params,
        indicator,
        za=A[:, blocks.z],
        zb=B[:, blocks.z],
    )


# ---------------------------------------------------------------------------
# vectorized grams


def _matern_gram_from_d2(d2: np.ndarray, signal_variance: float) -> np.ndarray:
    d = np.sqrt(np.maximum(d2, 0.0))
    return signal_variance * (1.0 + SQRT5 * d + (5.0 / 3.0) * d2) * np.exp(-SQRT5 * d)


def _cross_sqdist(a: np.ndarray, b: np.ndarray, lengthscales: np.ndarray) -> np.ndarray:
    """Pairwise squared lengthscale-weighted distances between row sets."""
    sa = a / lengthscales
    sb = b / lengthscales
    d2 = (
        np.sum(sa**2, axis=1)[:, None]
        + np.sum(sb**2, axis=1)[None, :]
        - 2.0 * sa @ sb.T
    )
    return np.maximum(d2, 0.0)


def _indicator_gram(za: np.ndarray, zb: np.ndarray, mode: str) -> np.ndarray:
    if za.shape[1] == 0:
        return np.ones((za.shape[0], zb.shape[0]))
    eq = za[:, None, :] == zb[None, :, :]
    if mode == "strict":
        return np.all(eq, axis=2).astype(float)
    return np.mean(eq, axis=2)


def _mixture_gram(
    xa: np.ndarray,
    xb: np.ndarray,
    lin_a: np.ndarray,
    lin_b: np.ndarray,
    iz: np.ndarray | None,
    params: KernelParams,
    indicator: str,
    za: np.ndarray | None = None,
    zb: np.ndarray | None = None,
) -> np.ndarray:
    """Cross Gram matrix; iz may carry a precomputed indicator gram."""
    n, m = xa.shape[0], xb.shape[0]
    total = np.zeros((n, m))
    prod = np.ones((n, m))
    present = False
    if xa.shape[1]:
        km = _matern_gram_from_d2(
            _cross_sqdist(xa, xb, params.lengthscales), params.signal_variance
        )
        total += km
        prod *= km
        present = True
    if lin_a.shape[1]:
        kl = params.v * (lin_a @ lin_b.T)
        total += kl
        prod *= kl
        present = True
    if iz is None and za is not None and za.shape[1]:
        iz = _indicator_gram(za, zb, indicator)
    if iz is not None:
        total += iz
        prod *= iz
        present = True
    if not present:
        raise ValueError("cannot evaluate a kernel over zero dimensions")
    return (1.0 - params.lam) * total + params.lam * prod


# ---------------------------------------------------------------------------
# model fitting


@dataclass(frozen=True, eq=False)
class GpModel:
    """A fitted surrogate, frozen after construction.

    Stores the training design in warped coordinates, the standardized
    Cholesky factorization, and everything needed to evaluate posterior
    quantities. ``target_mean`` and ``target_std`` undo the internal
    standardization.
    """

    inputs: np.ndarray
    targets: np.ndarray
    blocks: Blocks
    params: KernelParams
    log_likelihood: float
    target_mean: float
    target_std: float
    jitter: float
    indicator: str
    linear_on_raw: bool
    _linear_features: np.ndarray
    _chol: np.ndarray
    _alpha: np.ndarray
    _linear_map: tuple | None

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    def _linear_block(self, x: np.ndarray) -> np.ndarray:
        """Features fed to the linear kernel for query rows x."""
        cols = x[:, self.blocks.y]
        if self.linear_on_raw and self._linear_map is not None:
            los, spans = self._linear_map
            return los + cols * spans
        return cols


def _linear_map_for(space: SearchSpace) -> tuple | None:
    """Affine map from warped y-block coordinates to raw integer values.

    Only linear-scale integers can be mapped with a single affine
    transform; spaces with log-scale integers fall back to warped
    features even when linear_on_raw is set.
    """
    y_idx = space.blocks.y
    if y_idx.size == 0:
        return None
    los, spans = [], []
    for i in y_idx:
        p = space.params[i]
        if p.scale != "linear":
            return None
        los.append(float(p.lo))
        spans.append(float(p.hi - p.lo))
    return np.array(los), np.array(spans)


def _log_marginal_likelihood(gram: np.ndarray, targets: np.ndarray) -> float:
    """Exact Gaussian log evidence; -inf when the factorization fails."""
    try:
        c, low = cho_factor(gram, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        return -np.inf
    diag = np.diag(c)
    if not np.all(diag > 0):
        return -np.inf
    alpha = cho_solve((c, low), targets, check_finite=False)
    n = targets.shape[0]
    return float(
        -0.5 * targets @ alpha - np.sum(np.log(diag)) - 0.5 * n * math.log(2.0 * math.pi)
    )


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_section(fun, lo: float, hi: float, iters: int = 9):
    """Deterministic golden-section maximization on [lo, hi].

    Returns the best probed (argument, value) pair, including endpoints.
    """
    pts = [(lo, fun(lo)), (hi, fun(hi))]
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    pts += [(c, fc), (d, fd)]
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
            pts.append((c, fc))
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
            pts.append((d, fd))
    return max(pts, key=lambda t: t[1])


def gp_fit(
    inputs: np.ndarray,
    targets: np.ndarray,
    space: SearchSpace,
    config: SurrogateConfig | None = None,
    blocks: Blocks | None = None,
) -> GpModel:
    """Fit the surrogate to warped observations.

    Parameters
    ----------
    inputs : ndarray, shape (n, D)
        Warped training design, n >= 2.
    targets : ndarray, shape (n,)
        Finite objective values.
    space : SearchSpace
        Provides block structure and the raw-integer map.
    config : SurrogateConfig, optional
    blocks : Blocks, optional
        Override for the block partition. Passing ``Blocks.all_real(D)``
        treats every dimension as continuous.

    Returns
    -------
    GpModel

    Notes
    -----
    Targets are standardized to zero mean and unit variance (std floored
    at 1e-8) before fitting. Hyperparameters maximize the log marginal
    likelihood via a fixed set of starts followed by coordinate-wise
    golden-section refinement of the log lengthscales and log variances,
    with the mixing weight scanned over ``config.lambda_grid``. The
    search is deterministic and stops at ``config.max_fit_evals``
    likelihood evaluations. The fitted likelihood is never below the
    likelihood at the default hyperparameters because the first start
    probes them. Gram factorizations escalate diagonal jitter from 1e-8
    by factors of 10 up to 1e-2 before raising NumericalError.
    """
    if config is None:
        config = SurrogateConfig()
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.asarray(targets, dtype=float).ravel()
    n, d = X.shape
    if d != space.dim:
        raise ValueError(f"inputs have {d} columns but the space has {space.dim} dimensions")
    if y.shape[0] != n:
        raise ValueError("inputs and targets disagree on n")
    if n < 2:
        raise ValueError("need at least 2 observations to fit")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise ValueError("inputs and targets must be finite")
    if blocks is None:
        blocks = space.blocks

    mean = float(np.mean(y))
    std = max(float(np.std(y)), STD_FLOOR)
    ys = (y - mean) / std

    dx = int(blocks.x.size)
    linear_map = _linear_map_for(space) if (config.linear_on_raw and blocks.y.size) else None
    Xx = X[:, blocks.x]
    if linear_map is not None:
        los, spans = linear_map
        lin = los + X[:, blocks.y] * spans
    else:
        lin = X[:, blocks.y]
    Zt = X[:, blocks.z]

    # Per-dimension squared differences are fixed across the search, so the
    # Matern gram for any lengthscale vector is a cheap weighted sum.
    diff2 = (Xx[:, None, :] - Xx[None, :, :]) ** 2 if dx else None
    lin_gram = lin @ lin.T if lin.shape[1] else None
    ind_gram = _indicator_gram(Zt, Zt, config.indicator) if Zt.shape[1] else None
    has_block = (dx > 0) or lin_gram is not None or ind_gram is not None
    if not has_block:
        raise ValueError("cannot fit a surrogate over zero dimensions")
    eye = np.eye(n)

    lam_relevant = (lin_gram is not None) or (ind_gram is not None)
    lam_default = 0.5 if lam_relevant else 0.0

    evals = 0

    def likelihood(log_ls: np.ndarray, log_sv: float, log_nv: float, lam: float) -> float:
        nonlocal evals
        if evals >= config.max_fit_evals:
            return -np.inf
        evals += 1
        total = np.zeros((n, n))
        prod = np.ones((n, n))
        if dx:
            ls = np.exp(log_ls)
            d2 = np.tensordot(diff2, 1.0 / ls**2, axes=([2], [0]))
            km = _matern_gram_from_d2(d2, math.exp(log_sv))
            total += km
            prod *= km
        if lin_gram is not None:
            total += lin_gram
            prod *= lin_gram
        if ind_gram is not None:
            total += ind_gram
            prod *= ind_gram
        gram = (1.0 - lam) * total + lam * prod + math.exp(log_nv) * eye
        return _log_marginal_likelihood(gram, ys)

    lb = (math.log(config.lengthscale_bounds[0]), math.log(config.lengthscale_bounds[1]))
    sb = (math.log(config.signal_bounds[0]), math.log(config.signal_bounds[1]))
    nb = (math.log(config.noise_bounds[0]), math.log(config.noise_bounds[1]))

    def clamp(v, bounds):
        return min(max(v, bounds[0]), bounds[1])

    starts = [
        (DEFAULT_LENGTHSCALE, DEFAULT_SIGNAL_VARIANCE, DEFAULT_NOISE_VARIANCE),
        (0.15, 2.0, 1e-4),
        (1.0, 0.5, 1e-3),
        (0.05, 5.0, 1e-2),
    ]

    best = None  # (ll, log_ls, log_sv, log_nv, lam)

    def consider(ll, log_ls, log_sv, log_nv, lam):
        nonlocal best
        if best is None or ll > best[0]:
            best = (ll, np.array(log_ls), log_sv, log_nv, lam)

    for ls0, sv0, nv0 in starts:
        log_ls = np.full(dx, clamp(math.log(ls0), lb)) if dx else np.zeros(0)
        log_sv = clamp(math.log(sv0), sb)
        log_nv = clamp(math.log(nv0), nb)
        lam = lam_default
        ll = likelihood(log_ls, log_sv, log_nv, lam)
        consider(ll, log_ls, log_sv, log_nv, lam)
        for _ in range(config.n_sweeps):
            if evals >= config.max_fit_evals:
                break
            for k in range(dx):

                def f_ls(v, k=k):
                    trial = log_ls.copy()
                    trial[k] = v
                    return likelihood(trial, log_sv, log_nv, lam)

                arg, val = _golden_section(f_ls, lb[0], lb[1])
                if val > ll:
                    log_ls = log_ls.copy()
                    log_ls[k] = arg
                    ll = val
                consider(ll, log_ls, log_sv, log_nv, lam)
            if dx:
                arg, val = _golden_section(
                    lambda v: likelihood(log_ls, v, log_nv, lam), sb[0], sb[1]
                )
                if val > ll:
                    log_sv, ll = arg, val
                consider(ll, log_ls, log_sv, log_nv, lam)
            arg, val = _golden_section(
                lambda v: likelihood(log_ls, log_sv, v, lam), nb[0], nb[1]
            )
            if val > ll:
                log_nv, ll = arg, val
            consider(ll, log_ls, log_sv, log_nv, lam)
            if lam_relevant:
                for g in config.lambda_grid:
                    val = likelihood(log_ls, log_sv, log_nv, g)
                    if val > ll:
                        lam, ll = g, val
                consider(ll, log_ls, log_sv, log_nv, lam)
        if evals >= config.max_fit_evals:
            break

    ll_best, log_ls, log_sv, log_nv, lam = best
    params = KernelParams(
        lengthscales=np.exp(log_ls) if dx else np.ones(0),
        signal_variance=math.exp(log_sv),
        lam=lam if lam_relevant else 0.0,
        noise_variance=math.exp(log_nv),
    )

    # Final factorization at the selected hyperparameters, escalating
    # jitter only if the noise floor alone is not enough.
    gram = _mixture_gram(
        Xx, Xx, lin, lin, ind_gram, params, config.indicator
    ) + params.noise_variance * eye
    jitter = 0.0
    chol = None
    trial = 1e-8
    while True:
        try:
            chol = np.linalg.cholesky(gram + jitter * eye)
            break
        except np.linalg.LinAlgError:
            if trial > 1e-2:
                raise NumericalError(
                    "kernel matrix is not positive definite even with jitter 1e-2"
                ) from None
            jitter = trial
            trial *= 10.0

    alpha = cho_solve((chol, True), ys, check_finite=False)
    return GpModel(
        inputs=X,
        targets=y,
        blocks=blocks,
        params=params,
        log_likelihood=ll_best if math.isfinite(ll_best) else -np.inf,
        target_mean=mean,
        target_std=std,
        jitter=jitter,
        indicator=config.indicator,
        linear_on_raw=linear_map is not None,
        _linear_features=lin,
        _chol=chol,
        _alpha=alpha,
        _linear_map=linear_map,
    )


# ---------------------------------------------------------------------------
# posterior evaluation


def _raw_posterior(model: GpModel, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Standardized latent posterior mean and symmetrized covariance."""
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    if Q.shape[1] != model.inputs.shape[1]:
        raise ValueError(
            f"queries have {Q.shape[1]} columns, model expects {model.inputs.shape[1]}"
        )
    if not np.all(np.isfinite(Q)):
        raise ValueError("query points must be finite")
    bl = model.blocks
    ks = _mixture_gram(
        model.inputs[:, bl.x],
        Q[:, bl.x],
        model._linear_features,
        model._linear_block(Q),
        None,
        model.params,
        model.indicator,
        za=model.inputs[:, bl.z],
        zb=Q[:, bl.z],
    )
    kss = _mixture_gram(
        Q[:, bl.x],
        Q[:, bl.x],
        model._linear_block(Q),
        model._linear_block(Q),
        None,
        model.params,
        model.indicator,
        za=Q[:, bl.z],
        zb=Q[:, bl.z],
    )
    mean = ks.T @ model._alpha
    w = solve_triangular(model._chol, ks, lower=True, check_finite=False)
    cov = kss - w.T @ w
    cov = 0.5 * (cov + cov.T)
    return mean, cov


def gp_posterior(model: GpModel, queries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean vector and covariance matrix of the latent function.

    Parameters
    ----------
    model : GpModel
    queries : ndarray, shape (q, D)
        Warped query points.

    Returns
    -------
    mean : ndarray, shape (q,)
    cov : ndarray, shape (q, q)
        Symmetric positive semidefinite (eigenvalues clipped at zero),
        in target units. Observation noise is not added.
    """
    mean, cov = _raw_posterior(model, queries)
    vals, vecs = np.linalg.eigh(cov)
    cov = (vecs * np.clip(vals, 0.0, None)) @ vecs.T
    cov = 0.5 * (cov + cov.T)
    return model.target_mean + model.target_std * mean, (model.target_std**2) * cov


def gp_mean(model: GpModel, queries: np.ndarray) -> np.ndarray:
    """Posterior mean only, skipping all covariance work."""
    Q = np.atleast_2d(np.asarray(queries, dtype=float))
    bl = model.blocks
    ks = _mixture_gram(
        model.inputs[:, bl.x],
        Q[:, bl.x],
        model._linear_features,
        model._linear_block(Q),
        None,
        model.params,
        model.indicator,
        za=model.inputs[:, bl.z],
        zb=Q[:, bl.z],
    )
    return model.target_mean + model.target_std * (ks.T @ model._alpha)


def gp_sample(
    model: GpModel,
    queries: np.ndarray,
    rng: np.random.Generator,
    count: int = 1,
) -> np.ndarray:
    """Joint posterior draws over a set of query points.

    Parameters
    ----------
    model : GpModel
    queries : ndarray, shape (q, D)
    rng : numpy Generator
        Consumed; identical rng state gives identical draws.
    count : int
        Number of joint draws.

    Returns
    -------
    ndarray, shape (count, q)
        Draws in target units.

    Notes
    -----
    The covariance root is taken by Cholesky with escalating jitter and
    falls back to an eigendecomposition with clipped eigenvalues, so
    rank-deficient covariances (duplicate or fully explained points) are
    handled without error.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    mean, cov = _raw_posterior(model, queries)
    q = mean.shape[0]
    root = None
    jitter = 0.0
    trial = 1e-10
    while trial <= 1e-4:
        try:
            root = np.linalg.cholesky(cov + jitter * np.eye(q))
            break
        except np.linalg.LinAlgError:
            jitter = trial
            trial *= 10.0
    if root is None:
        vals, vecs = np.linalg.eigh(cov)
        root = vecs * np.sqrt(np.clip(vals, 0.0, None))
    z = rng.standard_normal((q, count))
    draws = mean[:, None] + root @ z
    return model.target_mean + model.target_std * draws.T
