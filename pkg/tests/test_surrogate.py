"""Tests for the mixture kernel and the Gaussian process surrogate.

Scalar kernel reference values were computed independently from the
closed-form expression at 40 decimal digits and are frozen here.
"""

import numpy as np
import pytest

from mixbo.space import Blocks, ParamSpec, SearchSpace
from mixbo.surrogate import (
    KernelParams,
    SurrogateConfig,
    gp_fit,
    gp_mean,
    gp_posterior,
    gp_sample,
    indicator_kernel,
    linear_kernel,
    matern52,
    mixture_kernel,
)


def mixed_space():
    return SearchSpace(
        [
            ParamSpec("a", "real", lo=0.0, hi=1.0),
            ParamSpec("b", "real", lo=0.0, hi=1.0),
            ParamSpec("n", "integer", lo=0, hi=6),
            ParamSpec("c", "categorical", categories=("p", "q", "r")),
            ParamSpec("f", "boolean"),
        ]
    )


# --- scalar kernels ---------------------------------------------------


def test_matern_matches_high_precision_reference():
    # reference values: sv (1 + sqrt(5) d + 5 d^2 / 3) exp(-sqrt(5) d)
    # evaluated with 40-digit arithmetic
    cases = [
        ((0.0,), (1.0,), (1.0,), 1.0, 0.52399410883182031059),
        ((0.2,), (0.9,), (0.35,), 2.5, 0.34665054784626061059),
        (
            (0.1, 0.4, 0.8),
            (0.3, 0.3, 0.5),
            (0.5, 0.25, 1.5),
            0.7,
            0.53829517647613251853,
        ),
    ]
    for x, x2, ls, sv, want in cases:
        got = matern52(np.array(x), np.array(x2), np.array(ls), sv)
        assert got == pytest.approx(want, abs=1e-15)


def test_matern_at_zero_distance_is_signal_variance():
    x = np.array([0.3, 0.7])
    ls = np.array([0.2, 0.9])
    assert matern52(x, x, ls, 3.25) == pytest.approx(3.25, abs=0.0)


def test_matern_is_symmetric_and_decreasing():
    ls = np.array([0.5])
    vals = [matern52(np.array([0.0]), np.array([d]), ls, 1.0) for d in (0.1, 0.4, 0.9)]
    assert vals[0] > vals[1] > vals[2] > 0.0
    assert matern52(np.array([0.1]), np.array([0.6]), ls, 1.0) == pytest.approx(
        matern52(np.array([0.6]), np.array([0.1]), ls, 1.0), abs=0.0
    )


def test_linear_kernel_is_a_dot_product():
    y = np.array([0.5, 1.0])
    y2 = np.array([0.2, 0.4])
    assert linear_kernel(y, y2) == pytest.approx(0.5, abs=1e-15)
    assert linear_kernel(y, y2, v=3.0) == pytest.approx(1.5, abs=1e-15)


def test_indicator_kernel_counts_matching_dims():
    z = np.array([0.0, 0.5, 1.0])
    z2 = np.array([0.0, 0.5, 0.0])
    assert indicator_kernel(z, z2) == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert indicator_kernel(z, z2, mode="strict") == 0.0
    assert indicator_kernel(z, z, mode="strict") == 1.0


# --- mixture combination ---------------------------------------------


def sample_inputs(rng, space, n):
    return space.snap(rng.random((n, space.dim)))


def test_mixture_edges_reduce_to_sum_and_product():
    space = mixed_space()
    bl = space.blocks
    rng = np.random.default_rng(11)
    H = sample_inputs(rng, space, 12)
    ls = np.array([0.4, 0.8])
    for i in range(0, 12, 3):
        h1, h2 = H[i], H[(i + 5) % 12]
        km = matern52(h1[bl.x], h2[bl.x], ls, 2.0)
        kl = linear_kernel(h1[bl.y], h2[bl.y])
        ki = indicator_kernel(h1[bl.z], h2[bl.z])
        p0 = KernelParams(lengthscales=ls, signal_variance=2.0, lam=0.0)
        p1 = KernelParams(lengthscales=ls, signal_variance=2.0, lam=1.0)
        ph = KernelParams(lengthscales=ls, signal_variance=2.0, lam=0.3)
        assert mixture_kernel(h1, h2, p0, bl) == pytest.approx(km + kl + ki, abs=0.0)
        assert mixture_kernel(h1, h2, p1, bl) == pytest.approx(km * kl * ki, abs=0.0)
        assert mixture_kernel(h1, h2, ph, bl) == pytest.approx(
            0.7 * (km + kl + ki) + 0.3 * (km * kl * ki), rel=1e-15
        )


def test_mixture_on_pure_continuous_space_is_matern():
    bl = Blocks.all_real(3)
    rng = np.random.default_rng(5)
    h1, h2 = rng.random(3), rng.random(3)
    p = KernelParams(lengthscales=np.array([0.3, 0.5, 0.7]), signal_variance=1.7, lam=0.6)
    km = matern52(h1, h2, p.lengthscales, 1.7)
    assert mixture_kernel(h1, h2, p, bl) == pytest.approx(km, abs=0.0)


def test_missing_block_drops_from_sum_and_product():
    # integers and categoricals, no reals
    space = SearchSpace(
        [
            ParamSpec("n", "integer", lo=0, hi=5),
            ParamSpec("c", "categorical", categories=("u", "v")),
        ]
    )
    bl = space.blocks
    h1 = np.array([0.2, 0.0])
    h2 = np.array([0.4, 0.0])
    kl = linear_kernel(h1[:1], h2[:1])
    ki = 1.0
    p = KernelParams(lengthscales=np.array([]), signal_variance=1.0, lam=0.25)
    assert mixture_kernel(h1, h2, p, bl) == pytest.approx(0.75 * (kl + ki) + 0.25 * kl * ki, abs=0.0)


def test_random_grams_are_positive_semidefinite():
    space = mixed_space()
    bl = space.blocks
    rng = np.random.default_rng(2)
    H = sample_inputs(rng, space, 60)
    for _ in range(8):
        p = KernelParams(
            lengthscales=rng.uniform(0.05, 2.0, size=2),
            signal_variance=float(rng.uniform(0.1, 5.0)),
            lam=float(rng.uniform(0.0, 1.0)),
        )
        G = np.array([[mixture_kernel(H[i], H[j], p, bl) for j in range(60)] for i in range(60)])
        w = np.linalg.eigvalsh(G + 1e-8 * np.eye(60))
        assert w.min() >= -1e-10


# --- kernel parameter validation --------------------------------------


def test_kernel_params_validation():
    ls = np.array([0.5])
    with pytest.raises(ValueError):
        KernelParams(lengthscales=ls, signal_variance=0.0)
    with pytest.raises(ValueError):
        KernelParams(lengthscales=ls, signal_variance=1.0, lam=1.5)
    with pytest.raises(ValueError):
        KernelParams(lengthscales=ls, signal_variance=1.0, noise_variance=0.0)
    with pytest.raises(ValueError):
        KernelParams(lengthscales=np.array([-0.1]), signal_variance=1.0)


# --- GP fit and posterior ---------------------------------------------


def test_posterior_matches_dense_solve_oracle():
    space = mixed_space()
    rng = np.random.default_rng(7)
    for n in (2, 3, 6):
        X = sample_inputs(rng, space, n)
        y = rng.standard_normal(n)
        model = gp_fit(X, y, space)
        Q = sample_inputs(rng, space, 5)
        mu, cov = gp_posterior(model, Q)

        p = model.params
        bl = space.blocks
        K = np.array(
            [[mixture_kernel(X[i], X[j], p, bl) for j in range(n)] for i in range(n)]
        )
        K[np.diag_indices(n)] += p.noise_variance + model.jitter
        ys = (y - model.target_mean) / model.target_std
        Ks = np.array(
            [[mixture_kernel(Q[i], X[j], p, bl) for j in range(n)] for i in range(5)]
        )
        Kss = np.array(
            [[mixture_kernel(Q[i], Q[j], p, bl) for j in range(5)] for i in range(5)]
        )
        mu_o = Ks @ np.linalg.solve(K, ys) * model.target_std + model.target_mean
        cov_o = (Kss - Ks @ np.linalg.solve(K, Ks.T)) * model.target_std**2
        np.testing.assert_allclose(mu, mu_o, atol=1e-10, rtol=0.0)
        np.testing.assert_allclose(cov, cov_o, atol=1e-10, rtol=0.0)


def test_noise_free_interpolation_on_smooth_curve():
    space = SearchSpace([ParamSpec("x", "real", lo=0.0, hi=1.0)])
    X = np.linspace(0.02, 0.98, 8).reshape(-1, 1)
    y = np.sin(3.0 * X[:, 0])
    model = gp_fit(X, y, space)
    mu, _ = gp_posterior(model, X)
    assert np.abs(mu - y).max() < 1e-3


def test_fit_never_does_worse_than_default_parameters():
    space = mixed_space()
    rng = np.random.default_rng(19)
    X = sample_inputs(rng, space, 14)
    y = np.sin(4 * X[:, 0]) + 0.5 * X[:, 2] + (X[:, 3] > 0.4)
    model = gp_fit(X, y, space)
    # the search evaluates the default start first and keeps the best
    # point seen, so a truncated budget can never beat the full one
    stub = gp_fit(X, y, space, config=SurrogateConfig(max_fit_evals=10))
    assert model.log_likelihood >= stub.log_likelihood - 1e-9


def test_fitted_parameters_respect_bounds():
    space = mixed_space()
    rng = np.random.default_rng(23)
    X = sample_inputs(rng, space, 16)
    y = rng.standard_normal(16)
    cfg = SurrogateConfig()
    model = gp_fit(X, y, space, config=cfg)
    p = model.params
    lo, hi = cfg.lengthscale_bounds
    assert np.all(p.lengthscales >= lo) and np.all(p.lengthscales <= hi)
    assert cfg.signal_bounds[0] <= p.signal_variance <= cfg.signal_bounds[1]
    assert cfg.noise_bounds[0] <= p.noise_variance <= cfg.noise_bounds[1]
    assert p.lam in cfg.lambda_grid


def test_lambda_fixed_to_zero_without_discrete_blocks():
    space = SearchSpace(
        [ParamSpec("x", "real", lo=0.0, hi=1.0), ParamSpec("y", "real", lo=0.0, hi=1.0)]
    )
    rng = np.random.default_rng(3)
    X = rng.random((10, 2))
    y = X[:, 0] ** 2
    model = gp_fit(X, y, space)
    assert model.params.lam == 0.0


def test_constant_targets_do_not_crash_the_fit():
    space = SearchSpace([ParamSpec("x", "real", lo=0.0, hi=1.0)])
    X = np.linspace(0, 1, 6).reshape(-1, 1)
    y = np.full(6, 2.5)
    model = gp_fit(X, y, space)
    mu, _ = gp_posterior(model, np.array([[0.37]]))
    assert mu[0] == pytest.approx(2.5, abs=1e-6)


def test_gp_mean_agrees_with_posterior_mean():
    space = mixed_space()
    rng = np.random.default_rng(31)
    X = sample_inputs(rng, space, 12)
    y = rng.standard_normal(12)
    model = gp_fit(X, y, space)
    Q = sample_inputs(rng, space, 7)
    mu, _ = gp_posterior(model, Q)
    np.testing.assert_allclose(gp_mean(model, Q), mu, atol=1e-10, rtol=0.0)


def test_gp_sample_shapes_and_determinism():
    space = mixed_space()
    rng = np.random.default_rng(13)
    X = sample_inputs(rng, space, 10)
    y = rng.standard_normal(10)
    model = gp_fit(X, y, space)
    Q = sample_inputs(rng, space, 6)
    s1 = gp_sample(model, Q, np.random.default_rng(77), count=4)
    s2 = gp_sample(model, Q, np.random.default_rng(77), count=4)
    assert s1.shape == (4, 6)
    np.testing.assert_array_equal(s1, s2)
    # samples concentrate near the posterior mean, not the prior
    mu, cov = gp_posterior(model, Q)
    sd = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    big = np.abs(gp_sample(model, Q, np.random.default_rng(5), count=64) - mu)
    assert np.mean(big <= 4.0 * sd + 1e-6) > 0.99
