"""Batched ask/tell optimizer tying the pieces together.

The loop alternates strictly between :meth:`Optimizer.suggest`, which
returns a batch of points, and :meth:`Optimizer.observe`, which takes
their objective values. Early batches come from a scrambled Sobol design
over the whole cube. Once the design is exhausted, each batch is chosen
by fitting the surrogate to all history, generating Sobol candidates
inside the trust region, discarding candidates outside the learned good
region, and taking the per-draw minima of joint posterior samples
(Thompson sampling on the surrogate). Qualitative coordinates of the
chosen batch are then overwritten by the per-variable bandits.

Every observed batch updates the trust region. When the region collapses
below its minimum length the optimizer restarts it: the next batch is a
fresh design drawn from the learned good region (uniform if partitioning
is off or not yet active), and the region is re-centered at the most
promising of those proposals under the current surrogate mean.

All randomness flows through a single generator seeded at construction,
so runs with equal inputs are bit-for-bit reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import arp as arp_mod
from . import bandit as bandit_mod
from . import turbo as turbo_mod
from .arp import ArpConfig, DegenerateValuesError, RegionClassifier
from .bandit import BanditConfig, BanditState
from .space import Blocks, Point, SearchSpace
from .surrogate import GpModel, SurrogateConfig, gp_fit, gp_mean, gp_sample
from .turbo import TrustRegionConfig


class ProtocolError(RuntimeError):
    """suggest/observe were called out of turn or with mismatched data."""


class ConfigError(ValueError):
    """The optimizer configuration is inconsistent with the space."""


class EmptyHistoryError(RuntimeError):
    """best() was asked for before any observation arrived."""


@dataclass(frozen=True)
class OptimizerConfig:
    """Run settings plus the feature flags of the ablation arms.

    ``init_points`` defaults to ``max(batch_size, min(2 * (D + 1),
    3 * batch_size))`` and is rounded up to whole batches when served.
    The three ``enable_*`` flags switch region partitioning, the mixed
    kernel, and the qualitative bandits independently; with all three
    off the optimizer is a plain trust-region method on the warped cube.
    """

    batch_size: int = 8
    max_iterations: int = 16
    init_points: int | None = None
    seed: int = 0
    turbo: TrustRegionConfig = field(default_factory=TrustRegionConfig)
    arp: ArpConfig = field(default_factory=ArpConfig)
    bandit: BanditConfig = field(default_factory=BanditConfig)
    surrogate: SurrogateConfig = field(default_factory=SurrogateConfig)
    enable_arp: bool = True
    enable_mixture_kernel: bool = True
    enable_bandit: bool = True

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be at least 1")
        if self.init_points is not None and self.init_points < self.batch_size:
            raise ConfigError("init_points must be at least batch_size")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")

    def resolved_init_points(self, dim: int) -> int:
        if self.init_points is not None:
            return self.init_points
        return max(self.batch_size, min(2 * (dim + 1), 3 * self.batch_size))


_CONFIG_SCALARS = {"batch_size", "max_iterations", "init_points", "seed"}
_CONFIG_SECTIONS = {"turbo": TrustRegionConfig, "arp": ArpConfig, "bandit": BanditConfig, "surrogate": SurrogateConfig}
_FLAG_KEYS = {"arp": "enable_arp", "mixture_kernel": "enable_mixture_kernel", "bandit": "enable_bandit"}


def _section_from_dict(cls, doc: dict, where: str):
    fields_ = {f.name: f for f in cls.__dataclass_fields__.values()}
    unknown = set(doc) - set(fields_)
    if unknown:
        raise ConfigError(f"unknown {where} settings: {sorted(unknown)}")
    kwargs = {}
    for key, val in doc.items():
        if isinstance(val, list):
            val = tuple(val)
        kwargs[key] = val
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {where} settings: {exc}") from exc


def config_from_dict(doc: dict) -> OptimizerConfig:
    """Build an OptimizerConfig from the documented JSON schema.

    Every field is optional. Recognized keys are the scalar settings
    (``batch_size``, ``max_iterations``, ``init_points``, ``seed``), the
    nested sections ``turbo``, ``arp``, ``bandit``, ``surrogate``, and a
    ``flags`` object with booleans ``arp``, ``mixture_kernel``, and
    ``bandit``. Unknown keys anywhere raise ConfigError.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config document must be an object")
    allowed = _CONFIG_SCALARS | set(_CONFIG_SECTIONS) | {"flags"}
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs: dict[str, Any] = {k: doc[k] for k in _CONFIG_SCALARS if k in doc}
    for section, cls in _CONFIG_SECTIONS.items():
        if section in doc:
            if not isinstance(doc[section], dict):
                raise ConfigError(f'"{section}" must be an object')
            kwargs[section] = _section_from_dict(cls, doc[section], section)
    flags = doc.get("flags", {})
    if not isinstance(flags, dict):
        raise ConfigError('"flags" must be an object')
    unknown = set(flags) - set(_FLAG_KEYS)
    if unknown:
        raise ConfigError(f"unknown flags: {sorted(unknown)}")
    for key, attr in _FLAG_KEYS.items():
        if key in flags:
            if not isinstance(flags[key], bool):
                raise ConfigError(f'flag "{key}" must be a boolean')
            kwargs[attr] = flags[key]
    try:
        return OptimizerConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True, eq=False)
class Observation:
    """One evaluated point as the optimizer recorded it.

    ``warped`` is the exact coordinate vector of ``point``; ``arms``
    maps each qualitative variable to the arm index the point plays;
    ``new_best`` says whether the value improved the global best as of
    the start of its batch; ``warned`` marks values that arrived
    non-finite and were imputed to +inf.
    """

    point: Point
    warped: np.ndarray
    value: float
    iteration: int
    arms: dict[str, int]
    new_best: bool
    warned: bool


@dataclass(eq=False)
class _Pending:
    points: list[Point]
    warped: np.ndarray
    arms: list[dict[str, int]]


def _arm_indices(space: SearchSpace, point: Point) -> dict[str, int]:
    arms = {}
    for p in space.qualitative_params:
        val = point[p.name]
        arms[p.name] = int(val) if p.kind == "boolean" else p.categories.index(val)
    return arms


class Optimizer:
    """Mixed-variable trust-region optimizer with an ask/tell interface.

    Parameters
    ----------
    space : SearchSpace
        At least one parameter, at most 64.
    config : OptimizerConfig, optional

    Notes
    -----
    ``suggest`` and ``observe`` must alternate strictly; breaking the
    protocol raises ProtocolError without corrupting state. Non-finite
    observed values are imputed to +inf and flagged rather than
    rejected, so a crashing objective cannot wedge the loop.
    """

    def __init__(self, space: SearchSpace, config: OptimizerConfig | None = None):
        if config is None:
            config = OptimizerConfig()
        if space.dim < 1:
            raise ConfigError("the search space has no parameters")
        if space.dim > 64:
            raise ConfigError("at most 64 dimensions are supported")
        self.space = space
        self.config = config
        self._turbo = config.turbo.resolve(space.dim, config.batch_size)
        self._arp = config.arp.resolve(space.dim)
        self._rng = np.random.default_rng(config.seed)
        self._init_points = config.resolved_init_points(space.dim)
        n_batches = math.ceil(self._init_points / config.batch_size)
        design_seed = int(self._rng.integers(0, 2**31))
        self._init_design = space.snap(
            turbo_mod.sobol_points(n_batches * config.batch_size, space.dim, seed=design_seed)
        )
        self._init_served = 0
        self._history: list[Observation] = []
        self._pending: _Pending | None = None
        self._tr = turbo_mod.new_state(self._turbo)
        self._restart_pending = False
        self._model: GpModel | None = None
        self._classifier: RegionClassifier | None = None
        self._bandit = BanditState.from_space(space) if space.qualitative_params else None
        self._best_point: Point | None = None
        self._best_value = math.inf
        self._iteration = 0
        self._counters = {
            "gp_fits": 0,
            "arp_fits": 0,
            "arp_filters": 0,
            "bandit_selects": 0,
            "bandit_updates": 0,
            "restarts": 0,
            "imputed_values": 0,
        }

    # -- read-only views ---------------------------------------------------

    @property
    def history(self) -> tuple[Observation, ...]:
        return tuple(self._history)

    @property
    def model(self) -> GpModel | None:
        """Most recently fitted surrogate, None before the first model batch."""
        return self._model

    @property
    def diagnostics(self) -> dict[str, Any]:
        """Counters and region geometry, for tests and instrumentation."""
        out = dict(self._counters)
        out["iterations"] = self._iteration
        out["observations"] = len(self._history)
        out["tr_length"] = self._tr.length
        out["tr_restarts"] = self._tr.restarts
        return out

    def best(self) -> tuple[Point, float]:
        """Best observed point and value (earliest on exact ties).

        When every observation was imputed (all values infinite) the
        earliest observed point is returned with an infinite value, so
        callers can always rely on getting a point back.
        """
        if not self._history:
            raise EmptyHistoryError("no observations yet")
        if self._best_point is None:
            return dict(self._history[0].point), self._best_value
        return dict(self._best_point), self._best_value

    # -- ask ---------------------------------------------------------------

    def suggest(self) -> list[Point]:
        """Propose the next batch of points to evaluate.

        Returns
        -------
        list of dict
            Exactly ``batch_size`` valid points. The same list must be
            passed back to :meth:`observe`.
        """
        if self._pending is not None:
            raise ProtocolError("suggest called again before observe")
        if len(self._history) < self._init_points:
            batch = self._next_init_batch()
        elif self._restart_pending:
            batch = self._restart_batch()
            self._restart_pending = False
        else:
            batch = self._model_batch()
        points = [self.space.unwarp(w) for w in batch]
        warped = np.array([self.space.warp(p) for p in points])
        arms = [_arm_indices(self.space, p) for p in points]
        self._pending = _Pending(points=points, warped=warped, arms=arms)
        return [dict(p) for p in points]

    def _next_init_batch(self) -> np.ndarray:
        b = self.config.batch_size
        lo = self._init_served
        self._init_served += b
        return self._init_design[lo : lo + b]

    def _restart_batch(self) -> np.ndarray:
        b = self.config.batch_size
        if self.config.enable_arp and self._classifier is not None:
            pts = arp_mod.restart_samples(self._classifier, self.space, self._rng, b)
            return np.array([self.space.warp(p) for p in pts])
        return np.array([self.space.warp(self.space.random_point(self._rng)) for _ in range(b)])

    def _model_batch(self) -> np.ndarray:
        space = self.space
        cfg = self.config
        X = np.array([ob.warped for ob in self._history])
        y = np.array([ob.value for ob in self._history])
        blocks = space.blocks if cfg.enable_mixture_kernel else Blocks.all_real(space.dim)
        model = gp_fit(X, y, space, cfg.surrogate, blocks=blocks)
        self._model = model
        self._counters["gp_fits"] += 1

        cands = turbo_mod.generate_candidates(self._tr, model, space, self._rng, self._turbo)
        # Score candidates as the points they would actually evaluate to.
        cands = space.snap(cands)

        best_idx = int(np.argmin(y))
        if cfg.enable_arp and len(self._history) >= self._arp.activation_threshold:
            clf = None
            try:
                labels = arp_mod.label_observations(y)
                clf = arp_mod.fit_classifier(X, labels, self._arp)
                self._classifier = clf
                self._counters["arp_fits"] += 1
            except DegenerateValuesError:
                pass  # a flat history carries no region signal this round
            if clf is not None:
                cands = arp_mod.filter_candidates(
                    clf, cands, X[best_idx], self._arp.fallback_fraction
                )
                self._counters["arp_filters"] += 1

        draws = gp_sample(model, cands, self._rng, count=cfg.batch_size)
        chosen: list[int] = []
        used: set[int] = set()
        for row in draws:
            order = np.argsort(row, kind="stable")
            pick = int(order[0])
            for idx in order:
                if int(idx) not in used:
                    pick = int(idx)
                    break
            used.add(pick)
            chosen.append(pick)
        batch = cands[chosen]

        if cfg.enable_bandit and self._bandit is not None:
            selections = [bandit_mod.ts_select(self._bandit, self._rng) for _ in range(cfg.batch_size)]
            self._counters["bandit_selects"] += cfg.batch_size
            batch = bandit_mod.overwrite_qualitative(batch, selections, space)
        return batch

    # -- tell ----------------------------------------------------------------

    def observe(self, points: Sequence[Point], values: Sequence[float]) -> None:
        """Report objective values for the batch returned by suggest.

        Parameters
        ----------
        points : sequence of dict
            Must equal the pending suggestion, same order.
        values : sequence of float
            One value per point. NaN and infinities are imputed to +inf
            and flagged in the history rather than rejected.
        """
        if self._pending is None:
            raise ProtocolError("observe called with no pending suggestion")
        pend = self._pending
        if len(points) != len(pend.points):
            raise ProtocolError(
                f"expected {len(pend.points)} points, got {len(points)}"
            )
        if len(values) != len(pend.points):
            raise ProtocolError("points and values disagree on length")
        for given, expected in zip(points, pend.points):
            if dict(given) != expected:
                raise ProtocolError("observed points do not match the pending suggestion")

        imputed = []
        warned = []
        for v in values:
            fv = float(v)
            ok = math.isfinite(fv)
            imputed.append(fv if ok else math.inf)
            warned.append(not ok)
            if not ok:
                self._counters["imputed_values"] += 1

        pre_best = self._best_value
        flags = [v < pre_best for v in imputed]
        for point, w, v, arms, nb, warn in zip(
            pend.points, pend.warped, imputed, pend.arms, flags, warned
        ):
            self._history.append(
                Observation(
                    point=dict(point),
                    warped=w.copy(),
                    value=v,
                    iteration=self._iteration,
                    arms=dict(arms),
                    new_best=nb,
                    warned=warn,
                )
            )
            if v < self._best_value:
                self._best_value = v
                self._best_point = dict(point)

        if self.config.enable_bandit and self._bandit is not None:
            bandit_mod.update_rewards(self._bandit, pend.arms, flags, self.config.bandit)
            self._counters["bandit_updates"] += 1

        bidx = int(np.argmin(imputed))
        self._tr = turbo_mod.update_region(
            self._tr, imputed[bidx], pend.warped[bidx], self._turbo
        )
        if turbo_mod.needs_restart(self._tr, self._turbo):
            self._counters["restarts"] += 1
            center = self._restart_center()
            self._tr = turbo_mod.restarted(self._tr, center, self._turbo)
            self._restart_pending = True

        self._pending = None
        self._iteration += 1

    def _restart_center(self) -> np.ndarray:
        """Most promising spot for a fresh region.

        With an active partition, draw proposals from the good region
        and take the one with the lowest surrogate mean; otherwise fall
        back to a uniform random point.
        """
        if self.config.enable_arp and self._classifier is not None:
            pts = arp_mod.restart_samples(self._classifier, self.space, self._rng, 100)
            W = np.array([self.space.warp(p) for p in pts])
            if self._model is not None:
                means = gp_mean(self._model, W)
                return W[int(np.argmin(means))]
            return W[0]
        return self.space.warp(self.space.random_point(self._rng))


def create(space: SearchSpace, config: OptimizerConfig | None = None) -> Optimizer:
    """Convenience constructor mirroring Optimizer(space, config)."""
    return Optimizer(space, config)
