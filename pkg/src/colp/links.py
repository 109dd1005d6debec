"""Link functions for cumulative-link models."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class LinkFunction:
    """A symmetric, strictly increasing CDF used as the link.

    ``kind`` is ``"logit"`` or ``"probit"``.  All methods accept scalars or
    arrays and handle ``+/-inf`` (cdf -> 1/0, pdf -> 0).
    """

    kind: str = "logit"

    def __post_init__(self):
        if self.kind not in LINKS:
            raise ValueError(f"unknown link {self.kind!r}; expected one of {sorted(LINKS)}")

    def cdf(self, x):
        if self.kind == "logit":
            return special.expit(x)
        return special.ndtr(x)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "logit":
            # expit(x) * expit(-x) stays accurate in both tails
            return special.expit(x) * special.expit(-x)
        with np.errstate(over="ignore"):
            return np.exp(-0.5 * x * x) / _SQRT_2PI

    def dpdf(self, x):
        """Derivative of the density."""
        x = np.asarray(x, dtype=float)
        if self.kind == "logit":
            return self.pdf(x) * (special.expit(-x) - special.expit(x))
        with np.errstate(invalid="ignore"):
            out = -x * self.pdf(x)
        return np.where(np.isfinite(x), out, 0.0)

    def inverse_cdf(self, p):
        if self.kind == "logit":
            return special.logit(p)
        return special.ndtri(p)

    def interval_prob(self, lower, upper):
        """``cdf(upper) - cdf(lower)`` evaluated on whichever tail avoids cancellation."""
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        with np.errstate(invalid="ignore"):
            right_tail = (lower + upper) > 0
        left = self.cdf(upper) - self.cdf(lower)
        right = self.cdf(-lower) - self.cdf(-upper)
        return np.where(right_tail, right, left)


LINKS = ("logit", "probit")

LOGIT = LinkFunction("logit")
PROBIT = LinkFunction("probit")


def get_link(link) -> LinkFunction:
    if isinstance(link, LinkFunction):
        return link
    return LinkFunction(str(link))
