"""Seeded generators for the simulation scenarios.

* ``s1``: L = S = 5, uniform cause marginal, beta ~ N(0, I), identity ordering,
  thresholds calibrated so every effect category has probability 1/L.
* ``s2``: the same with L = S = 10.
* ``s3``: a hidden confounder Z (uniform, 5 levels) with Z -> X, Z -> Y and
  X -> Y.  Y depends on the concatenated dummy codings of X and Z.  Z is
  dropped from the emitted sample.

Every replication draws from its own Philox stream derived from
``SeedSequence(seed, spawn_key=(rep,))``, parameters first and data second,
so replications that differ only in ``n`` share their generating parameters.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy import optimize

from .links import get_link
from .permutations import Permutation
from .sample import PairedSample

RNG_ALGORITHM = "numpy.random.Philox via SeedSequence(seed, spawn_key=(rep,))"

_SCENARIO_LEVELS = {"s1": 5, "s2": 10, "s3": 5}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "s1"
    L: int = 0
    S: int = 0
    n: int = 1000
    reps: int = 200
    seed: int = 0
    link: str = "logit"
    beta_sd: float = 1.0
    z_levels: int = 5

    def __post_init__(self):
        if self.scenario not in _SCENARIO_LEVELS:
            raise ValueError(f"unknown scenario {self.scenario!r}; expected s1, s2 or s3")
        default = _SCENARIO_LEVELS[self.scenario]
        object.__setattr__(self, "L", int(self.L) or default)
        object.__setattr__(self, "S", int(self.S) or default)
        get_link(self.link)
        if self.L < 2 or self.S < 2:
            raise ValueError("L and S must be at least 2")
        if self.n < 1 or self.reps < 1:
            raise ValueError("n and reps must be positive")
        if self.beta_sd <= 0:
            raise ValueError("beta_sd must be positive")
        if self.scenario == "s3" and self.z_levels < 2:
            raise ValueError("z_levels must be at least 2")

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Thresholds:
    """Calibrated thresholds ``(gamma_1 = 0, ..., gamma_{L-1})`` and the
    predictor effects shifted by the same constant."""

    gamma: np.ndarray
    beta: np.ndarray
    shift: float


@dataclass(frozen=True)
class GroundTruth:
    direction: str
    sigma_true: Permutation
    omega: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "direction": self.direction,
            "sigma_true": list(self.sigma_true.map),
            "omega": self.omega.tolist(),
            "beta": self.beta.tolist(),
            "gamma": self.gamma.tolist(),
        }
        out.update({k: np.asarray(v).tolist() for k, v in self.extra.items()})
        return out


def replication_rng(seed: int, rep: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(rep),))))


def calibrate_thresholds(beta, omega, link, L: int, xtol: float = 1e-12) -> Thresholds:
    """Thresholds giving each of the L categories marginal probability 1/L.

    Solves ``sum_s omega_s F(t - beta_s) = l / L`` for each ``l`` by root
    finding on the mixture CDF, then shifts thresholds and ``beta`` together
    so the first threshold is 0 (the conditional pmf is unchanged).
    """
    link = get_link(link)
    beta = np.asarray(beta, dtype=float).ravel()
    omega = np.asarray(omega, dtype=float).ravel()
    if beta.shape != omega.shape:
        raise ValueError("beta and omega must have the same length")
    if not np.all(np.isfinite(beta)):
        raise ValueError("beta must be finite")
    if np.any(omega < 0) or abs(omega.sum() - 1.0) > 1e-9:
        raise ValueError("omega must be a probability vector")

    def mixture_cdf(t):
        return float(np.dot(omega, link.cdf(t - beta)))

    raw = np.empty(L - 1)
    for ell in range(1, L):
        q = ell / L
        lo = beta.min() + float(link.inverse_cdf(q)) - 1.0
        hi = beta.max() + float(link.inverse_cdf(q)) + 1.0
        root, info = optimize.brentq(lambda t: mixture_cdf(t) - q, lo, hi, xtol=xtol, full_output=True)
        if not info.converged:
            raise RuntimeError(f"threshold {ell} did not converge")
        raw[ell - 1] = root
    shift = -raw[0]
    return Thresholds(gamma=raw + shift, beta=beta + shift, shift=shift)


def _cond_pmf(eta: np.ndarray, gamma: np.ndarray, link) -> np.ndarray:
    """Rows ``P(Y = l | eta)`` for identity ordering and full thresholds
    ``gamma = (gamma_1, ..., gamma_{L-1})``."""
    g = np.concatenate(([-np.inf], gamma, [np.inf]))
    return link.interval_prob(g[:-1][None, :] - eta[:, None], g[1:][None, :] - eta[:, None])


def _draw(rng: np.random.Generator, probs: np.ndarray) -> np.ndarray:
    """One categorical draw (1-based) per row of ``probs``."""
    cum = np.cumsum(probs, axis=1)
    u = rng.random(probs.shape[0])
    k = (u[:, None] >= cum[:, :-1]).sum(axis=1)
    return k + 1


def generate_replication(config: ScenarioConfig, rep: int) -> tuple[PairedSample, GroundTruth]:
    rng = replication_rng(config.seed, rep)
    link = get_link(config.link)
    S, L, n = config.S, config.L, config.n
    identity = Permutation.identity(L)

    if config.scenario in ("s1", "s2"):
        omega = np.full(S, 1.0 / S)
        beta = rng.normal(0.0, config.beta_sd, size=S)
        cal = calibrate_thresholds(beta, omega, link, L)
        x = _draw(rng, np.broadcast_to(omega, (n, S)))
        y = _draw(rng, _cond_pmf(cal.beta, cal.gamma, link)[x - 1])
        truth = GroundTruth("x_to_y", identity, omega, cal.beta, cal.gamma[1:])
        return PairedSample(x, y, S, L), truth

    # s3: Z -> X, Z -> Y, X -> Y
    Z = config.z_levels
    omega_z = np.full(Z, 1.0 / Z)
    beta_zx = rng.normal(0.0, config.beta_sd, size=Z)
    beta_xy = rng.normal(0.0, config.beta_sd, size=S)
    beta_zy = rng.normal(0.0, config.beta_sd, size=Z)
    cal_x = calibrate_thresholds(beta_zx, omega_z, link, S)
    px_given_z = _cond_pmf(cal_x.beta, cal_x.gamma, link)
    joint_xz = (omega_z[:, None] * px_given_z).T  # S x Z
    eta = beta_xy[:, None] + beta_zy[None, :]
    cal_y = calibrate_thresholds(eta.ravel(), joint_xz.ravel() / joint_xz.sum(), link, L)
    beta_xy = beta_xy + cal_y.shift

    z = _draw(rng, np.broadcast_to(omega_z, (n, Z)))
    x = _draw(rng, px_given_z[z - 1])
    y = _draw(rng, _cond_pmf(beta_xy[x - 1] + beta_zy[z - 1], cal_y.gamma, link))
    truth = GroundTruth(
        "x_to_y",
        identity,
        joint_xz.sum(axis=1),
        beta_xy,
        cal_y.gamma[1:],
        extra={"beta_zx": cal_x.beta, "gamma_x": cal_x.gamma[1:], "beta_zy": beta_zy},
    )
    return PairedSample(x, y, S, L), truth


def generate(config: ScenarioConfig):
    """Yield ``(sample, truth)`` for replications ``0..reps-1``."""
    for rep in range(config.reps):
        yield generate_replication(config, rep)


def population_joint(truth: GroundTruth, link) -> np.ndarray:
    """Generating joint ``P(X, Y)`` for s1/s2 truths (S x L)."""
    cond = _cond_pmf(truth.beta, np.concatenate(([0.0], truth.gamma)), get_link(link))
    return truth.omega[:, None] * cond
