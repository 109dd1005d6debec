"""Causal direction between two categorical variables by likelihood comparison.

Each hypothesis is a joint model ``P(cause) * P(effect | cause)`` with a
multinomial marginal for the cause and a COLP conditional for the effect.
The direction with the larger maximized joint likelihood wins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import (
    DEFAULT_SEARCH,
    ColpFit,
    SearchConfig,
    fit_colp,
    fit_colp_fixed,
)
from .links import get_link
from .ordinal import OrdinalError, pmf_table
from .permutations import Permutation
from .sample import PairedSample, SampleError

X_TO_Y = "x_to_y"
Y_TO_X = "y_to_x"
TIE = "tie"
DEFAULT_TIE_TOL = 1e-6


class DegenerateDataError(SampleError):
    pass


class CausalFitError(RuntimeError):
    """A direction could not be fitted; ``diagnostics`` says which and why."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class DirectionFit:
    direction: str
    marginal_probs: np.ndarray
    marginal_log_likelihood: float
    colp: ColpFit
    joint_log_likelihood: float

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "marginal_probs": self.marginal_probs.tolist(),
            "marginal_log_likelihood": self.marginal_log_likelihood,
            "joint_log_likelihood": self.joint_log_likelihood,
            "colp": self.colp.to_dict(),
        }


@dataclass(frozen=True)
class CausalVerdict:
    forward: DirectionFit
    backward: DirectionFit
    log_likelihood_gap: float
    decision: str
    tie_tolerance: float

    @property
    def separation(self) -> bool:
        return self.forward.colp.separation or self.backward.colp.separation

    def to_dict(self) -> dict:
        return {
            "decision": self.decision,
            "log_likelihood_gap": self.log_likelihood_gap,
            "tie_tolerance": self.tie_tolerance,
            "separation": self.separation,
            "forward": self.forward.to_dict(),
            "backward": self.backward.to_dict(),
        }


def marginal_mle(counts) -> tuple[np.ndarray, float]:
    """Multinomial MLE and its maximized log-likelihood (0 log 0 = 0)."""
    counts = np.asarray(counts, dtype=float)
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    n = counts.sum()
    if n <= 0:
        raise ValueError("counts are all zero")
    probs = counts / n
    pos = counts > 0
    return probs, float(np.sum(counts[pos] * np.log(probs[pos])))


def saturated_log_likelihood(data: PairedSample) -> float:
    """Maximized log-likelihood of the unrestricted S x L multinomial."""
    return marginal_mle(data.table().ravel())[1]


def check_causal_input(data: PairedSample):
    if data.S <= 2 or data.L <= 2:
        raise DegenerateDataError(f"causal comparison needs more than 2 levels per variable (S={data.S}, L={data.L})")
    for name, codes in (("x", data.x), ("y", data.y)):
        if np.unique(codes).size < 2:
            raise DegenerateDataError(f"column {name} has a single observed level")


def resolve_search(data: PairedSample, search: str) -> str:
    if search == "auto":
        return "exhaustive" if data.L <= 6 and data.S <= 6 else "greedy"
    if search not in ("exhaustive", "greedy"):
        raise ValueError(f"unknown search mode {search!r}")
    return search


def fit_direction(
    data: PairedSample,
    direction: str,
    link="logit",
    search: str = "auto",
    config: SearchConfig = DEFAULT_SEARCH,
    sigma: Permutation | None = None,
) -> DirectionFit:
    """Fit one causal hypothesis.  ``sigma`` freezes the effect permutation."""
    check_causal_input(data)
    if direction == X_TO_Y:
        oriented = data
    elif direction == Y_TO_X:
        oriented = data.swapped()
    else:
        raise ValueError(f"unknown direction {direction!r}")
    search = resolve_search(data, search)
    probs, marg_ll = marginal_mle(np.bincount(oriented.x - 1, minlength=oriented.S))
    if sigma is not None:
        colp = fit_colp_fixed(oriented, sigma, link, config)
    else:
        colp = fit_colp(oriented, link, search, config)
    return DirectionFit(
        direction=direction,
        marginal_probs=probs,
        marginal_log_likelihood=marg_ll,
        colp=colp,
        joint_log_likelihood=marg_ll + colp.log_likelihood,
    )


def joint_table(fit: DirectionFit) -> np.ndarray:
    """Fitted joint ``P(X = s, Y = l)`` as an S x L matrix (x in rows)."""
    cond = pmf_table(fit.colp.ordinal.params, fit.colp.sigma, fit.colp.link)
    joint = fit.marginal_probs[:, None] * cond
    return joint if fit.direction == X_TO_Y else joint.T


def classify_gap(gap: float, tie_tolerance: float) -> str:
    if gap > tie_tolerance:
        return X_TO_Y
    if gap < -tie_tolerance:
        return Y_TO_X
    return TIE


def decide(
    data: PairedSample,
    link="logit",
    search: str = "auto",
    config: SearchConfig = DEFAULT_SEARCH,
    tie_tolerance: float = DEFAULT_TIE_TOL,
    forward_sigma: Permutation | None = None,
    backward_sigma: Permutation | None = None,
) -> CausalVerdict:
    """Compare ``X -> Y`` against ``Y -> X`` on the same data.

    Both directions use the same search mode and optimizer settings.  A
    hard fitting failure raises :class:`CausalFitError`.
    """
    check_causal_input(data)
    link = get_link(link)
    search = resolve_search(data, search)
    fits = {}
    for direction, sigma in ((X_TO_Y, forward_sigma), (Y_TO_X, backward_sigma)):
        try:
            fits[direction] = fit_direction(data, direction, link, search, config, sigma)
        except OrdinalError as exc:
            raise CausalFitError(
                f"fitting {direction} failed: {exc}",
                {"direction": direction, "error": str(exc), "search": search, "link": link.kind},
            ) from exc
    forward, backward = fits[X_TO_Y], fits[Y_TO_X]
    gap = forward.joint_log_likelihood - backward.joint_log_likelihood
    return CausalVerdict(
        forward=forward,
        backward=backward,
        log_likelihood_gap=gap,
        decision=classify_gap(gap, tie_tolerance),
        tie_tolerance=tie_tolerance,
    )


def decision_credit(decision: str, truth: str, tie_credit: float = 0.5) -> float:
    """Accuracy credit of one verdict; a tie earns ``tie_credit``."""
    if decision == TIE:
        return tie_credit
    return 1.0 if decision == truth else 0.0
