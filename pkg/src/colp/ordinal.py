"""Cumulative-link (ordinal) regression of a categorical response on the dummy
coding of a categorical predictor, for a fixed label permutation.

The model for predictor level ``s`` and response category ``l`` is

    P(Y = l | X = s) = F(g[sigma(l)] - beta[s]) - F(g[sigma(l) - 1] - beta[s])

with ``g = (-inf, 0, gamma_2, ..., gamma_{L-1}, +inf)``.  Everything works on
the S x L contingency table, which is a sufficient statistic.

The optimizer runs on the unconstrained vector ``(beta_active, delta)`` where
``gamma_2 = exp(delta_2)`` and ``gamma_j = gamma_{j-1} + exp(delta_j)``, so
every iterate has strictly increasing thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .links import LinkFunction, get_link
from .permutations import Permutation
from .sample import PairedSample, SampleError

PROB_FLOOR = 1e-300
SEPARATION_PROB = 1e-12
# a zero cell (observed row, observed column) pushed below this is on its way to
# the boundary; the gradient tolerance is met long before |beta| reaches the cap
EMPTY_CELL_PROB = 1e-8


class OrdinalError(ValueError):
    pass


class DivergedLikelihood(OrdinalError):
    """An observed outcome has (numerically) zero probability."""


@dataclass(frozen=True)
class OrdinalParams:
    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float).ravel()
        gamma = np.array(self.gamma, dtype=float).ravel()
        if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(gamma))):
            raise OrdinalError("parameters must be finite")
        if gamma.size and (gamma[0] <= 0.0 or np.any(np.diff(gamma) <= 0.0)):
            raise OrdinalError(f"thresholds must satisfy 0 < gamma_2 < ... ; got {gamma.tolist()}")
        beta.setflags(write=False)
        gamma.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)

    @property
    def S(self) -> int:
        return self.beta.size

    @property
    def L(self) -> int:
        return self.gamma.size + 2

    def thresholds(self) -> np.ndarray:
        """``(g_0, ..., g_L)`` including the fixed boundary values."""
        return np.concatenate(([-np.inf, 0.0], self.gamma, [np.inf]))

    def reversed(self) -> "OrdinalParams":
        """Parameters giving the same conditional pmf under the reversed permutation.

        Relies on the link being symmetric, F(-x) = 1 - F(x).
        """
        g = np.concatenate(([0.0], self.gamma))
        top = g[-1]
        new_g = top - g[::-1]
        return OrdinalParams(top - self.beta, _strictly_increasing(new_g[1:]))

    def to_dict(self) -> dict:
        return {"beta": self.beta.tolist(), "gamma": self.gamma.tolist()}


@dataclass(frozen=True)
class OrdinalFit:
    params: OrdinalParams
    log_likelihood: float
    converged: bool
    iterations: int
    gradient_norm: float
    separation: bool = False
    min_observed_prob: float = 1.0
    trace: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            **self.params.to_dict(),
            "log_likelihood": self.log_likelihood,
            "converged": self.converged,
            "iterations": self.iterations,
            "gradient_norm": self.gradient_norm,
            "separation": self.separation,
        }


@dataclass(frozen=True)
class OptimizerConfig:
    tol: float = 1e-8
    max_iter: int = 200
    param_cap: float = 30.0
    armijo: float = 1e-4
    max_backtracks: int = 50
    max_step: float = 5.0


DEFAULT_OPTIMIZER = OptimizerConfig()


# ---------------------------------------------------------------------------
# pmf and likelihood on explicit parameters


def _check_sigma(sigma: Permutation, L: int):
    if sigma.size != L:
        raise OrdinalError(f"permutation has size {sigma.size}, expected L={L}")


def pmf_table(params: OrdinalParams, sigma: Permutation, link) -> np.ndarray:
    """S x L matrix of ``P(Y = l | X = s)``."""
    link = get_link(link)
    _check_sigma(sigma, params.L)
    g = params.thresholds()
    ranks = sigma.as_array()
    upper = g[ranks][None, :] - params.beta[:, None]
    lower = g[ranks - 1][None, :] - params.beta[:, None]
    return link.interval_prob(lower, upper)


def conditional_pmf(params: OrdinalParams, sigma: Permutation, link, s: int) -> np.ndarray:
    if not 1 <= s <= params.S:
        raise OrdinalError(f"predictor level {s} outside 1..{params.S}")
    return pmf_table(params, sigma, link)[s - 1]


def _check_data(params: OrdinalParams, data: PairedSample):
    if data.S != params.S or data.L != params.L:
        raise OrdinalError(
            f"data has S={data.S}, L={data.L} but parameters have S={params.S}, L={params.L}"
        )


def negative_log_likelihood(params: OrdinalParams, sigma: Permutation, link, data: PairedSample) -> float:
    """``-sum_i log P(y_i | x_i)``; ``inf`` when an observed outcome underflows."""
    _check_data(params, data)
    probs = pmf_table(params, sigma, link)
    counts = data.table()
    observed = counts > 0
    p = probs[observed]
    if np.any(p < PROB_FLOOR):
        return math.inf
    return float(-np.sum(counts[observed] * np.log(p)))


def nll_gradient(params: OrdinalParams, sigma: Permutation, link, data: PairedSample) -> np.ndarray:
    """Gradient with respect to ``(beta_1..beta_S, delta_2..delta_{L-1})``.

    Raises :class:`DivergedLikelihood` when the likelihood underflows.
    """
    _check_data(params, data)
    problem = _TableProblem(ordered_table(data, sigma), get_link(link), freeze_unobserved=False)
    theta = problem.pack(params)
    out = problem.derivatives(theta, hessian=False)
    if out is None:
        raise DivergedLikelihood("an observed outcome has probability below the underflow floor")
    return out[1]


# ---------------------------------------------------------------------------
# table-level objective


def _strictly_increasing(gamma: np.ndarray) -> np.ndarray:
    """Nudge thresholds that rounded onto their predecessor (collapsed gaps)
    up by one ulp so the strict ordering holds."""
    gamma = np.array(gamma, dtype=float)
    for j in range(gamma.size):
        floor = 0.0 if j == 0 else gamma[j - 1]
        if gamma[j] <= floor:
            gamma[j] = np.nextafter(floor, np.inf)
    return gamma


class _TableProblem:
    """NLL of a count table whose columns are already in rank order."""

    def __init__(self, table: np.ndarray, link: LinkFunction, freeze_unobserved: bool = True):
        self.table = np.asarray(table, dtype=float)
        self.S, self.L = self.table.shape
        self.link = link
        self.mask = self.table > 0
        if freeze_unobserved:
            self.active = np.flatnonzero(self.table.sum(axis=1) > 0)
        else:
            self.active = np.arange(self.S)
        self.n_beta = self.active.size
        self.n_delta = self.L - 2
        self.dim = self.n_beta + self.n_delta

    def pack(self, params: OrdinalParams) -> np.ndarray:
        g = np.concatenate(([0.0], params.gamma))
        return np.concatenate((params.beta[self.active], np.log(np.diff(g))))

    def unpack(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        beta = np.zeros(self.S)
        beta[self.active] = theta[: self.n_beta]
        gamma = np.cumsum(np.exp(theta[self.n_beta:]))
        return beta, gamma

    def params(self, theta: np.ndarray) -> OrdinalParams:
        beta, gamma = self.unpack(theta)
        return OrdinalParams(beta, _strictly_increasing(gamma))

    def _cells(self, theta):
        beta, gamma = self.unpack(theta)
        g = np.concatenate(([-np.inf, 0.0], gamma, [np.inf]))
        upper = g[1:][None, :] - beta[:, None]
        lower = g[:-1][None, :] - beta[:, None]
        return upper, lower, self.link.interval_prob(lower, upper)

    def value(self, theta: np.ndarray) -> float:
        if not np.all(np.isfinite(theta)):
            return math.inf
        with np.errstate(over="ignore"):
            _, _, prob = self._cells(theta)
        p = prob[self.mask]
        if not np.all(p >= PROB_FLOOR):
            return math.inf
        return float(-np.dot(self.table[self.mask], np.log(p)))

    def min_observed_prob(self, theta: np.ndarray) -> float:
        _, _, prob = self._cells(theta)
        return float(prob[self.mask].min())

    def min_empty_prob(self, theta: np.ndarray) -> float:
        """Smallest fitted probability among zero cells whose row and column
        both carry observations (1.0 when there are none)."""
        _, _, prob = self._cells(theta)
        live = (self.table.sum(axis=1) > 0)[:, None] & (self.table.sum(axis=0) > 0)[None, :]
        empty = live & ~self.mask
        return float(prob[empty].min()) if empty.any() else 1.0

    def derivatives(self, theta: np.ndarray, hessian: bool = True):
        """``(nll, grad, hess)`` in the unconstrained coordinates, or ``None``
        if an observed cell underflows."""
        link = self.link
        upper, lower, prob = self._cells(theta)
        m = self.table
        if not np.all(prob[self.mask] >= PROB_FLOOR):
            return None
        safe_p = np.where(self.mask, prob, 1.0)
        nll = float(-np.sum(m[self.mask] * np.log(prob[self.mask])))

        fu = link.pdf(upper)
        fl = link.pdf(lower)
        a_u = fu / safe_p
        a_l = -fl / safe_p
        Gu = m * a_u
        Gl = m * a_l

        L = self.L
        n_beta = self.n_beta
        delta = theta[n_beta:]
        ed = np.exp(delta)

        # d nll / d beta_s = sum_c m (a_u + a_l)
        grad_beta = (Gu + Gl).sum(axis=1)[self.active]
        # d nll / d g_t for t = 2..L-1 (0-based columns t-1 and t)
        grad_g = -(Gu[:, 1 : L - 1] + Gl[:, 2:L]).sum(axis=0)
        # chain rule: g_t = sum_{i<=t} exp(delta_i)
        rev_cum = np.cumsum(grad_g[::-1])[::-1]
        grad_delta = ed * rev_cum
        grad = np.concatenate((grad_beta, grad_delta))
        if not hessian:
            return nll, grad, None

        du = link.dpdf(upper)
        dl = link.dpdf(lower)
        Wuu = m * (du / safe_p - a_u * a_u)
        Wll = m * (-dl / safe_p - a_l * a_l)
        Wul = m * (-a_u * a_l)

        # Hessian of nll = -sum loglik in (beta, g_2..g_{L-1})
        h_bb = -(Wuu + Wll + 2.0 * Wul).sum(axis=1)[self.active]
        cols = np.arange(2, L)  # threshold indices t
        h_bg = (Wuu[:, cols - 1] + Wul[:, cols - 1] + Wll[:, cols] + Wul[:, cols])[self.active]
        h_gg = np.diag(-(Wuu[:, cols - 1] + Wll[:, cols]).sum(axis=0))
        if L > 3:
            off = -Wul[:, 2 : L - 1].sum(axis=0)
            h_gg += np.diag(off, 1) + np.diag(off, -1)

        # transform threshold block to delta coordinates
        J = np.tril(np.ones((L - 2, L - 2))) * ed[None, :]
        h_dd = J.T @ h_gg @ J + np.diag(ed * rev_cum)
        h_bd = h_bg @ J

        H = np.empty((self.dim, self.dim))
        H[:n_beta, :n_beta] = np.diag(h_bb)
        H[:n_beta, n_beta:] = h_bd
        H[n_beta:, :n_beta] = h_bd.T
        H[n_beta:, n_beta:] = h_dd
        return nll, grad, H


def _initial_theta(problem: _TableProblem) -> np.ndarray:
    link = problem.link
    col = problem.table.sum(axis=0)
    freq = (col + 0.5) / (col.sum() + 0.5 * problem.L)
    cum = np.cumsum(freq)[:-1]
    g = link.inverse_cdf(cum)
    g = g - g[0]
    return np.concatenate((np.zeros(problem.n_beta), np.log(np.diff(g))))


def _newton_direction(grad: np.ndarray, H: np.ndarray) -> np.ndarray:
    try:
        c = np.linalg.cholesky(H)
    except np.linalg.LinAlgError:
        c = None
    if c is None:
        # not positive definite: shift the spectrum until it is, which moves the
        # step toward steepest descent
        lam = max(1e-8, 1e-3 * float(np.max(np.abs(np.diag(H)))))
        eye = np.eye(H.shape[0])
        for _ in range(60):
            try:
                c = np.linalg.cholesky(H + lam * eye)
                break
            except np.linalg.LinAlgError:
                lam *= 10.0
        else:
            return -grad
    z = np.linalg.solve(c, -grad)
    return np.linalg.solve(c.T, z)


def fit_table(
    table: np.ndarray,
    link="logit",
    config: OptimizerConfig = DEFAULT_OPTIMIZER,
    init: OrdinalParams | None = None,
) -> OrdinalFit:
    """Maximum-likelihood fit on an S x L count table with columns in rank order.

    A table and its column reversal are mirror images of one problem (the
    link is symmetric), so the optimizer always runs on the lexicographically
    smaller of the two and the other is obtained by mirroring the parameters.
    This makes the fitted log-likelihood of an ordering and of its reversal
    bit-identical.
    """
    link = get_link(link)
    table = np.asarray(table)
    if table.ndim != 2 or table.shape[1] < 2:
        raise OrdinalError("table must be S x L with L >= 2")
    n = int(table.sum())
    if n < table.shape[1]:
        raise OrdinalError(f"need n >= L to identify thresholds (n={n}, L={table.shape[1]})")
    flipped = table[:, ::-1]
    if tuple(flipped.ravel()) < tuple(table.ravel()):
        fit = _fit_oriented(flipped, link, config, init.reversed() if init is not None else None)
        params = fit.params.reversed()
        beta = np.where(table.sum(axis=1) > 0, params.beta, 0.0)
        return replace(fit, params=OrdinalParams(beta, params.gamma))
    return _fit_oriented(table, link, config, init)


def _fit_oriented(table: np.ndarray, link: LinkFunction, config: OptimizerConfig, init) -> OrdinalFit:
    problem = _TableProblem(table, link)
    theta = problem.pack(init) if init is not None else _initial_theta(problem)

    trace = []
    converged = False
    it = 0
    gnorm = math.inf
    while True:
        out = problem.derivatives(theta)
        if out is None:
            raise DivergedLikelihood("initial point has an observed outcome with zero probability")
        f, grad, H = out
        trace.append(f)
        gnorm = float(np.max(np.abs(grad))) if grad.size else 0.0
        if gnorm <= config.tol:
            converged = True
            break
        if it >= config.max_iter:
            break
        d = _newton_direction(grad, H)
        step_max = float(np.max(np.abs(d)))
        if step_max > config.max_step:
            d *= config.max_step / step_max
        slope = float(grad @ d)
        if slope >= 0:
            d = -grad
            slope = -float(grad @ grad)
        t = 1.0
        accepted = False
        for _ in range(config.max_backtracks):
            cand = theta + t * d
            f_new = problem.value(cand)
            if f_new <= f + config.armijo * t * slope:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            # objective flat to rounding: take the full step only if it does not
            # increase the objective and improves the gradient
            cand = theta + d
            f_new = problem.value(cand)
            if f_new <= f + 4 * np.finfo(float).eps * abs(f):
                out_new = problem.derivatives(cand, hessian=False)
                if out_new is not None and np.max(np.abs(out_new[1])) < gnorm:
                    theta = cand
                    it += 1
                    continue
            break
        theta = cand
        it += 1

    params = problem.params(theta)
    min_p = problem.min_observed_prob(theta)
    big = max(float(np.max(np.abs(params.beta))), float(params.gamma[-1]) if params.gamma.size else 0.0)
    return OrdinalFit(
        params=params,
        log_likelihood=-trace[-1],
        converged=converged,
        iterations=it,
        gradient_norm=gnorm,
        separation=bool(
            big > config.param_cap
            or min_p < SEPARATION_PROB
            or problem.min_empty_prob(theta) < EMPTY_CELL_PROB
        ),
        min_observed_prob=min_p,
        trace=tuple(trace),
    )


def ordered_table(data: PairedSample, sigma: Permutation) -> np.ndarray:
    """Contingency table with response columns rearranged into rank order."""
    _check_sigma(sigma, data.L)
    return data.table()[:, np.asarray(sigma.order()) - 1]


def fit_ordinal(
    data: PairedSample,
    sigma: Permutation,
    link="logit",
    config: OptimizerConfig = DEFAULT_OPTIMIZER,
    init: OrdinalParams | None = None,
) -> OrdinalFit:
    """MLE of the cumulative-link model treating ``sigma(y)`` as ordered labels."""
    if data.n < data.L:
        raise SampleError(f"need n >= L to identify thresholds (n={data.n}, L={data.L})")
    return fit_table(ordered_table(data, sigma), link, config, init)
