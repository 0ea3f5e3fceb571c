"""The occupation-density renormalization map and its analysis.

Coarse-graining a block of A error locations that corrects up to k faults
sends an independent error density eta to the density of blocks with more
than k errors.  The map, its closed-form bound, and its derivative:

    R(eta)      = sum_{l=k+1}^{A} C(A, l) eta^l (1 - eta)^(A - l)
    Rbar(eta)   = min(1, 2^A eta^(k+1))                       (R <= Rbar)
    R'(eta)     = A C(A-1, k) eta^k (1 - eta)^(A-1-k)

R has a unique nontrivial fixed point eta_c in (0, 1) whenever A >= k+2,
with R below the diagonal on (0, eta_c): iterating the map from any
eta < eta_c drives the density to zero.  Iterating the bound instead gives
the closed form  Rbar^r(eta) <= 2^(-A/k) (2^(A/k) eta)^((k+1)^r),  which
yields 2^(-A/k) as an analytic lower estimate of eta_c.

Everything here is deterministic stdlib arithmetic; Monte Carlo lives in
:mod:`percrg.percolation` and :mod:`percrg.concat`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_LOG_DOMAIN_A = 30       # above this, per-term log-domain evaluation
_SCAN_POINTS = 1000      # coarse sign scan resolution for the fixed point
_MAX_LEVELS = 200        # safety cap for iteration-based level counts


class DegenerateMapError(RuntimeError):
    """The map has no nontrivial fixed point (A < k + 2)."""


class SupercriticalError(RuntimeError):
    """Iteration cannot reach the target because eta >= eta_c."""


@dataclass(frozen=True)
class CodeParameters:
    """An [[m, d]] code used with recovery procedures of spread s.

    m physical qubits per block, distance d, and spread s: one component
    failure corrupts at most s qubits within a block.  The pair qualifies
    for coarse-graining only when s <= d.
    """

    m: int
    d: int
    s: int

    def __post_init__(self) -> None:
        if self.m < 1 or self.d < 1 or self.s < 1:
            raise ValueError("code parameters must be positive")
        if self.d > self.m:
            raise ValueError(f"distance {self.d} exceeds block size {self.m}")
        if self.s > self.d:
            raise ValueError(
                f"spread {self.s} exceeds distance {self.d}: not a quantum computation code")


def block_threshold(code: CodeParameters) -> int:
    """Correctable fault count per block: k = floor(d / s)."""
    return code.d // code.s


@dataclass(frozen=True)
class RGParams:
    """Map parameters: block size A, correctable count k, degree constant alpha.

    alpha defaults to A; it only enters the derivative envelopes, not the
    map itself.
    """

    A: int
    k: int
    alpha: float | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.A < self.k + 1:
            raise ValueError(f"A must be >= k + 1 = {self.k + 1}, got {self.A}")
        if self.alpha is None:
            object.__setattr__(self, "alpha", float(self.A))
        elif self.alpha < 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")

    @classmethod
    def from_code(cls, code: CodeParameters, A: int, alpha: float | None = None) -> "RGParams":
        return cls(A=A, k=block_threshold(code), alpha=alpha)

    @property
    def bound_eta_c(self) -> float:
        """Analytic threshold estimate 2^(-A/k) from the closed-form bound."""
        return 2.0 ** (-self.A / self.k)


# ── the map, bound, derivative ──────────────────────────────────────────────


def _check_unit(eta: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")


def r_exact(eta: float, params: RGParams) -> float:
    """Binomial tail P[Binom(A, eta) >= k+1].

    Summed term by term over the tail (all terms positive, no cancellation);
    exact integer coefficients up to A = 30, log-domain terms beyond.
    """
    _check_unit(eta)
    A, k = params.A, params.k
    if eta == 0.0:
        return 0.0
    if eta == 1.0:
        return 1.0
    if A <= _LOG_DOMAIN_A:
        terms = [math.comb(A, l) * eta ** l * (1.0 - eta) ** (A - l)
                 for l in range(k + 1, A + 1)]
    else:
        log_eta = math.log(eta)
        log_1m = math.log1p(-eta)
        lg = math.lgamma
        terms = [math.exp(lg(A + 1) - lg(l + 1) - lg(A - l + 1)
                          + l * log_eta + (A - l) * log_1m)
                 for l in range(k + 1, A + 1)]
    return min(1.0, math.fsum(terms))


def r_bound(eta: float, params: RGParams) -> float:
    """Closed-form upper bound min(1, 2^A eta^(k+1))."""
    _check_unit(eta)
    if eta == 0.0:
        return 0.0
    log_b = params.A * math.log(2.0) + (params.k + 1) * math.log(eta)
    return 1.0 if log_b >= 0.0 else math.exp(log_b)


def r_derivative(eta: float, params: RGParams) -> float:
    """R'(eta) = A C(A-1, k) eta^k (1 - eta)^(A-1-k)."""
    _check_unit(eta)
    A, k = params.A, params.k
    if eta == 0.0 or (eta == 1.0 and A - 1 - k > 0):
        return 0.0
    if A <= _LOG_DOMAIN_A:
        return A * math.comb(A - 1, k) * eta ** k * (1.0 - eta) ** (A - 1 - k)
    lg = math.lgamma
    log_coeff = math.log(A) + lg(A) - lg(k + 1) - lg(A - k)
    return math.exp(log_coeff + k * math.log(eta) + (A - 1 - k) * math.log1p(-eta))


# ── fixed point ─────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ThresholdReport:
    """Nontrivial fixed point of the map and the linearization there."""

    params: RGParams
    eta_c: float
    lam: float           # R'(eta_c), the contraction rate near the fixed point
    bound_eta_c: float   # analytic estimate 2^(-A/k); always <= eta_c
    residual: float      # |R(eta_c) - eta_c|
    iterations: int

    def to_json_dict(self) -> dict:
        return {
            "A": self.params.A,
            "k": self.params.k,
            "alpha": self.params.alpha,
            "eta_c": self.eta_c,
            "lambda": self.lam,
            "bound_eta_c": self.bound_eta_c,
            "residual": self.residual,
        }


def find_threshold(params: RGParams, tol: float = 1e-12) -> ThresholdReport:
    """Locate the unique eta_c in (0, 1) with R(eta_c) = eta_c by bisection.

    A coarse sign scan brackets the crossing of g(eta) = R(eta) - eta from
    negative to positive; g is negative on (0, 2^(-A/k)), so the left scan
    edge starts below the analytic estimate.  Raises
    :class:`DegenerateMapError` when A < k + 2 (then R < eta on all of (0, 1)).
    """
    if params.A < params.k + 2:
        raise DegenerateMapError(
            f"degenerate map: no nontrivial fixed point for A={params.A}, k={params.k}")
    if tol <= 0:
        raise ValueError("tol must be positive")

    def g(e: float) -> float:
        return r_exact(e, params) - e
    lo = params.bound_eta_c / 2.0  # g(lo) < 0 is guaranteed analytically
    hi = None
    prev = lo
    for i in range(1, _SCAN_POINTS + 1):
        e = i / _SCAN_POINTS
        if e <= lo:
            continue
        if e >= 1.0:
            e = 1.0 - tol
        if g(e) > 0.0:
            lo, hi = prev, e
            break
        prev = e
    if hi is None:
        raise DegenerateMapError(
            f"degenerate map: no sign change found for A={params.A}, k={params.k}")
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        iterations += 1
        if g(mid) > 0.0:
            hi = mid
        else:
            lo = mid
        if iterations > 200:  # 2^-200 of the bracket; cannot happen with sane tol
            break
    eta_c = 0.5 * (lo + hi)
    return ThresholdReport(params=params, eta_c=eta_c,
                           lam=r_derivative(eta_c, params),
                           bound_eta_c=params.bound_eta_c,
                           residual=abs(g(eta_c)), iterations=iterations)


# ── iteration and level counts ──────────────────────────────────────────────


def iterate_map(eta: float, params: RGParams, levels: int) -> list[float]:
    """[eta, R(eta), R^2(eta), ..., R^levels(eta)]."""
    _check_unit(eta)
    if levels < 0:
        raise ValueError("levels must be >= 0")
    out = [eta]
    for _ in range(levels):
        out.append(r_exact(out[-1], params))
    return out


def iterate_bound(eta: float, params: RGParams, levels: int) -> float:
    """Closed form min(1, 2^(-A/k) (2^(A/k) eta)^((k+1)^levels)), log-domain.

    Level 0 returns eta itself, exactly.
    """
    _check_unit(eta)
    if levels < 0:
        raise ValueError("levels must be >= 0")
    if levels == 0 or eta == 0.0:
        return eta
    c = params.A / params.k
    growth = c * math.log(2.0) + math.log(eta)  # log of 2^(A/k) eta
    exponent = (params.k + 1) ** levels
    if exponent > 1e300:  # would overflow float; only the sign of growth matters
        if growth < 0.0:
            return 0.0
        if growth > 0.0:
            return 1.0
        log_b = -c * math.log(2.0)
    else:
        log_b = -c * math.log(2.0) + exponent * growth
    if log_b >= 0.0:
        return 1.0
    if log_b < -745.0:  # exp underflow
        return 0.0
    return math.exp(log_b)


@dataclass(frozen=True)
class LevelCount:
    """Coarse-graining depth needed to push the density below a target."""

    r_min: int                    # smallest r with R^r(eta) below epsilon/N
    r_bound_estimate: int | None  # same question asked of the closed-form bound
    target: float


def levels_needed(eta: float, params: RGParams, epsilon: float, N: int) -> LevelCount:
    """Levels until the iterated density falls below epsilon / N.

    r_min iterates the exact map; r_bound_estimate inverts the closed-form
    bound instead (None when the bound never contracts, i.e.
    eta >= 2^(-A/k)).  Requires eta < eta_c.
    """
    _check_unit(eta)
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    if N < 1:
        raise ValueError("N must be >= 1")
    report = find_threshold(params)
    if eta >= report.eta_c:
        raise SupercriticalError(
            f"supercritical: eta={eta} is not below eta_c={report.eta_c:.6g}, "
            "iteration cannot reach the target")
    target = epsilon / N
    x = eta
    r_min = 0
    while x > target:
        x = r_exact(x, params)
        r_min += 1
        if r_min > _MAX_LEVELS:
            raise SupercriticalError("iteration did not contract below the target")
    r_bound_estimate: int | None = None
    for r in range(_MAX_LEVELS + 1):
        if iterate_bound(eta, params, r) <= target:
            r_bound_estimate = r
            break
    return LevelCount(r_min=r_min, r_bound_estimate=r_bound_estimate, target=target)


def levels_linearized(report: ThresholdReport, delta: float, epsilon: float) -> int:
    """Linearized level estimate floor(log((eta_c - epsilon) / delta) / log(lambda)).

    delta is the gap eta_c - eta at the bottom scale, epsilon the residual
    headroom retained at the top; requires 0 < delta <= eta_c - epsilon.
    """
    if not 0.0 < epsilon < report.eta_c:
        raise ValueError(f"epsilon must lie in (0, eta_c={report.eta_c:.6g})")
    if not 0.0 < delta <= report.eta_c - epsilon:
        raise ValueError(f"delta must lie in (0, eta_c - epsilon={report.eta_c - epsilon:.6g}]")
    return math.floor(math.log((report.eta_c - epsilon) / delta) / math.log(report.lam))


# ── derivative envelopes and the overhead tradeoff ──────────────────────────


@dataclass(frozen=True)
class InequalityReport:
    """Worst-case margins of the derivative envelopes over an eta grid.

    Pointwise (margins are envelope minus R', so >= 0 means the envelope
    holds):  R(1-R)/(eta(1-eta)) <= R'(eta) <= sqrt(alpha/(eta(1-eta))),
    and at the fixed point lambda <= sqrt(alpha/(eta_c(1-eta_c))).
    Violations are reported, never raised.
    """

    params: RGParams
    n_points: int
    lower_margin: float       # min over grid of R' - lower envelope
    lower_argmin: float
    upper_margin: float       # min over grid of upper envelope - R'
    upper_argmin: float
    pointwise_hold: bool
    eta_c: float | None
    lam: float | None
    lam_bound: float | None   # sqrt(alpha/(eta_c(1-eta_c)))
    fixed_point_margin: float | None
    fixed_point_holds: bool | None
    lam_exceeds_one: bool | None


def check_inequalities(params: RGParams, etas: list[float]) -> InequalityReport:
    """Evaluate both derivative envelopes on a grid, plus the fixed-point form."""
    if not etas:
        raise ValueError("need at least one grid point")
    if any(not 0.0 < e < 1.0 for e in etas):
        raise ValueError("grid must lie inside (0, 1)")
    alpha = params.alpha
    lower_margin = math.inf
    upper_margin = math.inf
    lower_argmin = upper_argmin = etas[0]
    for eta in etas:
        r = r_exact(eta, params)
        rp = r_derivative(eta, params)
        denom = eta * (1.0 - eta)
        low = r * (1.0 - r) / denom
        up = math.sqrt(alpha / denom)
        if rp - low < lower_margin:
            lower_margin, lower_argmin = rp - low, eta
        if up - rp < upper_margin:
            upper_margin, upper_argmin = up - rp, eta
    eta_c = lam = lam_bound = fp_margin = None
    fp_holds = lam_gt_one = None
    if params.A >= params.k + 2:
        report = find_threshold(params)
        eta_c, lam = report.eta_c, report.lam
        lam_bound = math.sqrt(alpha / (eta_c * (1.0 - eta_c)))
        fp_margin = lam_bound - lam
        fp_holds = fp_margin >= 0.0
        lam_gt_one = lam > 1.0
    return InequalityReport(
        params=params, n_points=len(etas),
        lower_margin=lower_margin, lower_argmin=lower_argmin,
        upper_margin=upper_margin, upper_argmin=upper_argmin,
        pointwise_hold=lower_margin >= 0.0 and upper_margin >= 0.0,
        eta_c=eta_c, lam=lam, lam_bound=lam_bound,
        fixed_point_margin=fp_margin, fixed_point_holds=fp_holds,
        lam_exceeds_one=lam_gt_one)


@dataclass(frozen=True)
class TradeoffReport:
    """Accuracy/overhead consistency check at depth r.

    A final gap epsilon reached in r levels from initial gap delta requires
    eta_c (1 - eta_c) (eta_c - epsilon)^2 <= alpha delta^(2/r).
    """

    eta_c: float
    alpha: float
    epsilon: float
    delta: float
    r: int
    lhs: float
    rhs: float
    holds: bool


def tradeoff(report: ThresholdReport, delta: float, epsilon: float, r: int) -> TradeoffReport:
    eta_c = report.eta_c
    if not 0.0 < epsilon < eta_c:
        raise ValueError(f"epsilon must lie in (0, eta_c={eta_c:.6g})")
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if r < 1:
        raise ValueError("r must be >= 1")
    alpha = report.params.alpha
    lhs = eta_c * (1.0 - eta_c) * (eta_c - epsilon) ** 2
    rhs = alpha * delta ** (2.0 / r)
    return TradeoffReport(eta_c=eta_c, alpha=alpha, epsilon=epsilon, delta=delta,
                          r=r, lhs=lhs, rhs=rhs, holds=lhs <= rhs)
