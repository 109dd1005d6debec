"""COLP: ordinal regression with the label permutation fitted as a parameter."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .links import get_link
from .ordinal import (
    DEFAULT_OPTIMIZER,
    OptimizerConfig,
    OrdinalError,
    OrdinalFit,
    conditional_pmf,
    fit_table,
)
from .permutations import (
    Permutation,
    canonicalize,
    enumerate_all,
    transposition_neighbors,
)
from .sample import PairedSample, SampleError

TIE_EPS = 1e-9


class SearchGateError(ValueError):
    """Exhaustive search requested for more categories than the gate allows."""


@dataclass(frozen=True)
class SearchConfig:
    optimizer: OptimizerConfig = DEFAULT_OPTIMIZER
    max_exhaustive_levels: int = 8
    reversal_shortcut: bool = True
    adjacent_only: bool = False
    restarts: int = 1
    seed: int = 0


DEFAULT_SEARCH = SearchConfig()


@dataclass(frozen=True)
class ColpFit:
    sigma: Permutation
    ordinal: OrdinalFit
    search: str
    evaluations: int
    link: str = "logit"
    moves: int = 0
    trajectory: tuple = field(default=(), repr=False)
    separation: bool = False

    @property
    def log_likelihood(self) -> float:
        return self.ordinal.log_likelihood

    def to_dict(self) -> dict:
        return {
            "sigma": list(self.sigma.map),
            "search": self.search,
            "evaluations": self.evaluations,
            "moves": self.moves,
            "separation": self.separation,
            "ordinal": self.ordinal.to_dict(),
        }


@dataclass(frozen=True)
class ComplexityReport:
    L: int
    S: int
    ordinal: int
    multinomial: int
    colp: int
    causal_colp: int
    saturated: int
    degenerate: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def complexity(L: int, S: int) -> ComplexityReport:
    """Free-parameter counts of the competing conditional and joint models."""
    if L < 2 or S < 2:
        raise ValueError("complexity needs L, S >= 2")
    return ComplexityReport(
        L=L,
        S=S,
        ordinal=L - 2 + S,
        multinomial=(L - 1) * S,
        colp=2 * L + S - 4,
        causal_colp=2 * L + 2 * S - 5,
        saturated=S * L - 1,
        degenerate=L == 2 or S == 2,
    )


class _Evaluator:
    """Caches ordinal fits by canonical permutation.

    A permutation and its reversal have the same maximized likelihood, so
    only the canonical member is ever fitted.
    """

    def __init__(self, table: np.ndarray, link, optimizer: OptimizerConfig):
        self.table = np.asarray(table)
        self.link = get_link(link)
        self.optimizer = optimizer
        self.cache: dict[Permutation, OrdinalFit] = {}

    def __call__(self, sigma: Permutation) -> OrdinalFit:
        key = canonicalize(sigma)
        fit = self.cache.get(key)
        if fit is None:
            ordered = self.table[:, np.asarray(key.order()) - 1]
            fit = fit_table(ordered, self.link, self.optimizer)
            self.cache[key] = fit
        return fit


def _check_input(data: PairedSample):
    if data.n < data.L:
        raise SampleError(f"need n >= L to identify thresholds (n={data.n}, L={data.L})")


def _best(items):
    """Deterministic argmax over ``(sigma, fit)`` pairs.

    Keyed by log-likelihood rounded to 1e-9, then smallest permutation map.
    """
    return min(items, key=lambda it: (-round(it[1].log_likelihood, 9), it[0].map))


def _as_canonical(sigma: Permutation, fit: OrdinalFit, table: np.ndarray, link, optimizer) -> tuple[Permutation, OrdinalFit]:
    """Report a winning ordering in canonical form.

    Fits are exactly reversal-invariant, so refitting the reversed ordering
    gives the same log-likelihood bit for bit with mirrored parameters.
    """
    if sigma.is_canonical:
        return sigma, fit
    canon = sigma.reversed()
    return canon, fit_table(table[:, np.asarray(canon.order()) - 1], link, optimizer)


def fit_colp_exhaustive(
    data: PairedSample,
    link="logit",
    config: SearchConfig = DEFAULT_SEARCH,
    full_enumeration: bool | None = None,
) -> ColpFit:
    """Best permutation over all of them.

    By default one member of each reversal pair is fitted (``L!/2`` fits);
    ``full_enumeration=True`` fits all ``L!`` independently.
    """
    _check_input(data)
    if data.L > config.max_exhaustive_levels:
        raise SearchGateError(
            f"exhaustive search over {data.L} levels exceeds the gate of "
            f"{config.max_exhaustive_levels} (raise --max-exhaustive-levels or use --search greedy)"
        )
    if full_enumeration is None:
        full_enumeration = not config.reversal_shortcut
    link = get_link(link)
    table = data.table()
    items = []
    for sigma in enumerate_all(data.L, canonical_only=not full_enumeration):
        ordered = table[:, np.asarray(sigma.order()) - 1]
        items.append((sigma, fit_table(ordered, link, config.optimizer)))
    sigma, fit = _as_canonical(*_best(items), table, link, config.optimizer)
    return ColpFit(
        sigma=sigma,
        ordinal=fit,
        search="exhaustive",
        evaluations=len(items),
        link=link.kind,
        separation=fit.separation,
    )


def _greedy_from(evaluate: _Evaluator, init: Permutation, adjacent_only: bool):
    current = init
    current_fit = evaluate(current)
    trajectory = [(current.map, current_fit.log_likelihood)]
    evaluations = 1
    moves = 0
    while True:
        neighbors = transposition_neighbors(current, adjacent_only=adjacent_only)
        scored = [(q, evaluate(q)) for q in neighbors]
        evaluations += len(scored)
        cand, cand_fit = _best(scored)
        if cand_fit.log_likelihood > current_fit.log_likelihood + TIE_EPS:
            current, current_fit = cand, cand_fit
            moves += 1
            trajectory.append((current.map, current_fit.log_likelihood))
        else:
            return current, current_fit, evaluations, moves, trajectory


def fit_colp_greedy(
    data: PairedSample,
    link="logit",
    init: Permutation | None = None,
    config: SearchConfig = DEFAULT_SEARCH,
) -> ColpFit:
    """Greedy best-improvement search over transposition neighbors.

    Each round scores every neighbor of the current permutation and moves to
    the one with the largest likelihood (ties broken by smallest map) if it
    improves strictly; the search stops at a local optimum.  With
    ``config.restarts > 1`` extra runs start from random permutations drawn
    from ``config.seed`` and the best local optimum is returned.
    """
    _check_input(data)
    link = get_link(link)
    evaluate = _Evaluator(data.table(), link, config.optimizer)
    starts = [init if init is not None else Permutation.identity(data.L)]
    if starts[0].size != data.L:
        raise OrdinalError(f"initial permutation has size {starts[0].size}, expected {data.L}")
    if config.restarts > 1:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(config.seed, spawn_key=(0x9E37,))))
        for _ in range(config.restarts - 1):
            starts.append(Permutation(tuple(int(v) for v in rng.permutation(data.L) + 1)))

    runs = []
    total = 0
    for start in starts:
        sigma, fit, evals, moves, traj = _greedy_from(evaluate, start, config.adjacent_only)
        total += evals
        runs.append((sigma, fit, moves, traj))
    best = min(runs, key=lambda r: (-round(r[1].log_likelihood, 9), canonicalize(r[0]).map))
    # the cache holds the canonical member's fit
    sigma = canonicalize(best[0])
    fit = evaluate(sigma)
    return ColpFit(
        sigma=sigma,
        ordinal=fit,
        search="greedy",
        evaluations=total,
        link=link.kind,
        moves=best[2],
        trajectory=tuple(best[3]),
        separation=fit.separation,
    )


def fit_colp_fixed(data: PairedSample, sigma: Permutation, link="logit", config: SearchConfig = DEFAULT_SEARCH) -> ColpFit:
    """COLP with the permutation held fixed (no search)."""
    _check_input(data)
    link = get_link(link)
    table = data.table()
    fit = fit_table(table[:, np.asarray(sigma.order()) - 1], link, config.optimizer)
    sigma, fit = _as_canonical(sigma, fit, table, link, config.optimizer)
    return ColpFit(sigma=sigma, ordinal=fit, search="fixed", evaluations=1, link=link.kind, separation=fit.separation)


def fit_colp(data: PairedSample, link="logit", search: str = "auto", config: SearchConfig = DEFAULT_SEARCH) -> ColpFit:
    """Dispatch on ``search``: ``exhaustive``, ``greedy`` or ``auto``
    (exhaustive up to six response levels)."""
    if search == "auto":
        search = "exhaustive" if data.L <= 6 else "greedy"
    if search == "exhaustive":
        return fit_colp_exhaustive(data, link, config)
    if search == "greedy":
        return fit_colp_greedy(data, link, config=config)
    raise ValueError(f"unknown search mode {search!r}")


def predict_proba(fit: ColpFit, s: int) -> np.ndarray:
    if not 1 <= s <= fit.ordinal.params.S:
        raise OrdinalError(f"predictor level {s} outside 1..{fit.ordinal.params.S}")
    return conditional_pmf(fit.ordinal.params, fit.sigma, fit.link, s)

