"""Static and fully-dynamic (h-)generalized shortfall risk measures.

A generalized shortfall prices a position X as the least cash amount m whose
aggregate f(X, m) reaches a utility target:

    rho(X) = inf { m : E[ U(f(X, m)) ] >= B },

and the dynamic version runs the same program nodewise on the conditional
distribution at each depth-t node with horizon-dependent (U_u, f_u, B_tu).
The aggregator f decouples cash from the position and is what makes the
measure cash non-additive; f(y, m) = y + m recovers the classical shortfall.

The infimum is computed by bisection over m (the constraint is monotone when
f is non-decreasing in m), with an expanding bracket and explicit
extended-real sentinels: the empty constraint set maps to ``PLUS_INF`` and
an always-satisfied constraint to ``MINUS_INF``.  Sentinels are enumerated
values, never floating-point infinities, inside all solver arithmetic; only
the nodewise (dynamic) results surface them as +-inf markers in the value
array.  Value-at-Risk is included through its shortfall representation with
the right-continuous step utility; its conditional quantile is computed by
exact atom enumeration, not bisection, since the constraint is
discontinuous, and the step "utility" is flagged non-concave (no
quasi-convexity claims attach to it).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, SpecificationError, TimeGridError
from .measures import HorizonSchedule, UtilityFn
from .probspace import RandomVariable
from .qcalculus import QParams, exp_q, exp_q_extended

__all__ = [
    "RiskSentinel", "AggregatorFn", "TargetSchedule", "ShortfallSpec",
    "static_shortfall", "dynamic_shortfall", "h_var", "ce_equivalence_check",
    "CeEquivalenceReport", "hq_shortfall_spec", "acceptance_member",
    "ExtendedReal",
]

_BISECT_TOL = 1e-9
_BRACKET_CAP = float(2 ** 20)


class RiskSentinel(enum.Enum):
    """Extended-real outcomes of an essential infimum over cash amounts."""

    PLUS_INF = "+inf"    # constraint never met: ess.inf of the empty set
    MINUS_INF = "-inf"   # constraint always met: ess.inf of the whole line

    def as_float(self) -> float:
        return math.inf if self is RiskSentinel.PLUS_INF else -math.inf


ExtendedReal = float | RiskSentinel


_GRID_1D = np.linspace(-5.0, 5.0, 50)


@dataclass(frozen=True)
class AggregatorFn:
    """Aggregator f(y, m) between a position outcome y and cash m.

    Declared structure flags are verified on a 50 x 50 sample grid at
    construction: monotonicity in each argument and, when claimed, the
    cash-subadditivity condition f(y, k) <= f(y - m, k + m) for m > 0.
    """

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    monotone_y: bool = True
    monotone_m: bool = True
    csa: bool = False
    name: str = ""

    def __post_init__(self):
        y, m = np.meshgrid(_GRID_1D, _GRID_1D, indexing="ij")
        vals = self.fn(y, m)
        if self.monotone_y and np.any(np.diff(vals, axis=0) < -1e-10):
            raise SpecificationError(
                f"aggregator {self.name!r}: monotone_y flag fails on the grid"
            )
        if self.monotone_m and np.any(np.diff(vals, axis=1) < -1e-10):
            raise SpecificationError(
                f"aggregator {self.name!r}: monotone_m flag fails on the grid"
            )
        if self.csa:
            for shift in (0.5, 1.0, 2.0):
                lhs = self.fn(y, m)
                rhs = self.fn(y - shift, m + shift)
                if np.any(lhs - rhs > 1e-10):
                    raise SpecificationError(
                        f"aggregator {self.name!r}: csa flag fails for "
                        f"m={shift}"
                    )

    def __call__(self, y, m):
        return self.fn(np.asarray(y, dtype=float), np.asarray(m, dtype=float))

    # -- stock aggregators --------------------------------------------------
    @classmethod
    def additive(cls) -> "AggregatorFn":
        """f(y, m) = y + m: the classical, cash additive shortfall."""
        return cls(fn=lambda y, m: y + m, csa=True, name="additive")

    @classmethod
    def scaled_additive(cls, beta: float) -> "AggregatorFn":
        """f(y, m) = beta y + m with beta in (0, 1]."""
        if not 0.0 < beta <= 1.0:
            raise DomainError("scaled_additive needs beta in (0, 1]")
        return cls(fn=lambda y, m: beta * y + m, csa=True,
                   name=f"scaled_additive({beta})")

    @classmethod
    def exponential(cls, gamma: float) -> "AggregatorFn":
        """f(y, m) = 1 - exp(-gamma y - m) with gamma in (0, 1); increasing
        in both arguments, concave in y and cash subadditive."""
        if not 0.0 < gamma < 1.0:
            raise DomainError("exponential aggregator needs gamma in (0, 1)")
        return cls(
            fn=lambda y, m: 1.0 - np.exp(np.minimum(-gamma * y - m, 700.0)),
            csa=True, name=f"exponential({gamma})",
        )

    @classmethod
    def hq(cls, qparams: QParams, beta: float, horizon_term: float,
           target: float) -> "AggregatorFn":
        """The aggregator that represents the hq-entropic measure on losses
        as a generalized shortfall with identity utility:

            f(y, m) = B + exp_q(m) - exp_q((y+beta)^- + alpha_q + A)

        where A is the horizon premium A(t, u) and B the target B_tu.  The
        cash argument ranges over all of R, so exp_q is extended by zero
        below its domain boundary (its monotone continuous closure)."""
        if beta < 0.0:
            raise DomainError("severity buffer beta must be >= 0")
        if horizon_term < 0.0:
            raise DomainError("horizon term A(t,u) must be >= 0")
        q, alpha = qparams.q, qparams.alpha_q

        def f(y, m):
            loss = np.maximum(-(y + beta), 0.0) + alpha + horizon_term
            return target + exp_q_extended(m, q) - exp_q(loss, q)

        return cls(fn=f, csa=False, name=f"hq(q={q}, alpha={alpha})")

    @classmethod
    def ce_induced(cls, utility: UtilityFn, utilde: UtilityFn, target: float
                   ) -> "AggregatorFn":
        """f(y, m) = U^{-1}(Utilde(y) - Utilde(-m) + B): the unique
        aggregator making the generalized shortfall coincide with the
        certainty equivalent generated by Utilde."""

        def f(y, m):
            return utility.inverse_apply(
                utilde(y) - utilde(-np.asarray(m, dtype=float)) + target
            )

        return cls(fn=f, csa=False,
                   name=f"ce_induced({utilde.name or 'utilde'})")


@dataclass(frozen=True)
class TargetSchedule:
    """Deterministic target levels B_tu per (t, u) pair."""

    fn: Callable[[float, float], float]
    constant_in_t: bool = False

    @classmethod
    def constant(cls, B: float) -> "TargetSchedule":
        return cls(fn=lambda t, u: float(B), constant_in_t=True)

    @classmethod
    def from_function(cls, fn: Callable[[float, float], float],
                      constant_in_t: bool = False) -> "TargetSchedule":
        return cls(fn=fn, constant_in_t=constant_in_t)

    def __call__(self, t: float, u: float) -> float:
        value = float(self.fn(t, u))
        if not math.isfinite(value):
            raise SpecificationError(f"target B({t},{u}) is not finite")
        return value


class ShortfallSpec:
    """Triple (U_u, f_u, B_tu) defining an (h-)generalized shortfall.

    ``utility`` is a UtilityFn or a callable u -> UtilityFn; ``aggregator``
    an AggregatorFn or a callable (t, u) -> AggregatorFn (the hq family
    genuinely depends on both times through A(t,u) and B_tu).
    """

    def __init__(self,
                 utility: UtilityFn | Callable[[float], UtilityFn],
                 aggregator: AggregatorFn | Callable[[float, float], AggregatorFn],
                 targets: TargetSchedule):
        self._utility = utility
        self._aggregator = aggregator
        self.targets = targets

    def utility_at(self, u: float) -> UtilityFn:
        if isinstance(self._utility, UtilityFn):
            return self._utility
        return self._utility(u)

    def aggregator_at(self, t: float, u: float) -> AggregatorFn:
        if isinstance(self._aggregator, AggregatorFn):
            return self._aggregator
        return self._aggregator(t, u)

    def target_at(self, t: float, u: float) -> float:
        return self.targets(t, u)

    @classmethod
    def classic(cls, utility: UtilityFn, B: float) -> "ShortfallSpec":
        """Classical shortfall: additive aggregator and constant target."""
        return cls(utility, AggregatorFn.additive(), TargetSchedule.constant(B))

    def concavity_slack(self, t: float, u: float,
                        y_grid: np.ndarray | None = None,
                        m_grid: np.ndarray | None = None) -> float:
        """Largest second divided difference of y -> U(f(y, m)) over a grid;
        <= ~0 supports the concavity-in-y assumption of the quasi-convexity
        and duality statements."""
        U = self.utility_at(u)
        f = self.aggregator_at(t, u)
        ys = _GRID_1D if y_grid is None else np.asarray(y_grid, float)
        ms = np.array([-1.0, 0.0, 1.0]) if m_grid is None else np.asarray(m_grid, float)
        worst = -math.inf
        h = ys[1] - ys[0]
        for m in ms:
            vals = U(f(ys, np.full_like(ys, m)))
            second = vals[2:] - 2.0 * vals[1:-1] + vals[:-2]
            worst = max(worst, float(np.max(second / (h * h))))
        return worst


# ---------------------------------------------------------------------------
# bisection machinery
# ---------------------------------------------------------------------------

def _smallest_m(constraint: Callable[[float], float], target: float,
                start: float, tol: float = _BISECT_TOL,
                cap: float = _BRACKET_CAP) -> ExtendedReal:
    """Least m with constraint(m) >= target for a non-decreasing constraint.

    Brackets by doubling from +-start up to +-cap; returns PLUS_INF when the
    constraint stays below the target at the cap and MINUS_INF when it is
    already met at -cap.  A detected decrease of the constraint along the
    probe points raises :class:`SpecificationError`.
    """
    probes: list[tuple[float, float]] = []

    def value(m: float) -> float:
        v = float(constraint(m))
        probes.append((m, v))
        return v

    hi = abs(start)
    while value(hi) < target:
        hi *= 2.0
        if hi > cap:
            _monotone_guard(probes)
            return RiskSentinel.PLUS_INF
    lo = -abs(start)
    while value(lo) >= target:
        lo *= 2.0
        if lo < -cap:
            _monotone_guard(probes)
            return RiskSentinel.MINUS_INF
    _monotone_guard(probes)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if value(mid) >= target:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _monotone_guard(probes: list[tuple[float, float]]) -> None:
    pts = sorted(probes)
    for (m1, v1), (m2, v2) in zip(pts, pts[1:]):
        if v2 < v1 - 1e-9 * max(1.0, abs(v1)):
            raise SpecificationError(
                f"shortfall constraint is not non-decreasing in m: value "
                f"drops from {v1!r} at m={m1!r} to {v2!r} at m={m2!r}"
            )


def _bracket_start(X: RandomVariable, utility: UtilityFn, target: float) -> float:
    scale = 0.0
    if utility.inverse is not None:
        lo, hi = utility.codomain
        if lo - 1e-12 <= target <= hi + 1e-12:
            scale = abs(float(utility.inverse_apply(target)))
    return 1.0 + 2.0 * (X.max_abs() + scale)


def static_shortfall(X: RandomVariable, spec: ShortfallSpec,
                     u: float | None = None, t: float = 0.0) -> ExtendedReal:
    """Generalized shortfall inf{m : E[U_u(f_u(X, m))] >= B_tu} at t = 0."""
    if t != 0.0:
        raise TimeGridError("the static shortfall is evaluated at t = 0")
    model = X.model
    if u is None:
        u = model.times[X.depth]
    U = spec.utility_at(u)
    f = spec.aggregator_at(t, u)
    B = spec.target_at(t, u)
    weights = model.probs(X.depth)
    xvals = X.values

    def constraint(m: float) -> float:
        return float(np.dot(weights, U(f(xvals, np.full_like(xvals, m)))))

    return _smallest_m(constraint, B, start=_bracket_start(X, U, B))


def dynamic_shortfall(X: RandomVariable, t: float, spec: ShortfallSpec,
                      u: float | None = None) -> RandomVariable:
    """Nodewise h-generalized shortfall at depth(t): at each depth-t node the
    static bisection runs on the conditional subtree distribution.  Sentinel
    outcomes surface as +-inf markers in the returned values."""
    model = X.model
    kt = model.depth_of(t)
    if u is None:
        u = model.times[X.depth]
    ku = model.depth_of(u)
    if ku < X.depth:
        raise TimeGridError("horizon u must not precede the depth of X")
    if kt > X.depth:
        raise TimeGridError("evaluation time t must not exceed depth(X)")
    U = spec.utility_at(u)
    f = spec.aggregator_at(t, u)
    B = spec.target_at(t, u)
    cond = model.cond_matrix(kt, X.depth)
    xvals = X.values
    start = _bracket_start(X, U, B)
    out = np.empty(model.num_nodes(kt))
    for i in range(model.num_nodes(kt)):
        row = cond[i]

        def constraint(m: float) -> float:
            return float(np.dot(row, U(f(xvals, np.full_like(xvals, m)))))

        try:
            res = _smallest_m(constraint, B, start=start)
        except SpecificationError as exc:
            raise SpecificationError(f"node {i} at depth {kt}: {exc}") from exc
        out[i] = res if isinstance(res, float) else res.as_float()
    return RandomVariable(model, kt, out)


def h_var(X: RandomVariable, t: float, alpha_u: float) -> RandomVariable:
    """Value at Risk through its shortfall representation,

        ess.inf { m : P(X + m >= 0 | F_t) >= 1 - alpha_u },

    computed nodewise by exact enumeration of the conditional atoms (the
    right-continuous step utility makes bisection inappropriate)."""
    if not 0.0 < alpha_u < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    model = X.model
    kt = model.depth_of(t)
    cond = model.cond_matrix(kt, X.depth)
    level = 1.0 - alpha_u
    atoms, inv = np.unique(X.values, return_inverse=True)
    out = np.empty(model.num_nodes(kt))
    for i in range(model.num_nodes(kt)):
        mass = np.zeros(len(atoms))
        np.add.at(mass, inv, cond[i])
        # tail probability P(X >= atoms[j] | node): suffix sums
        tail = np.cumsum(mass[::-1])[::-1]
        ok = tail >= level - 1e-12
        out[i] = -float(atoms[ok][-1])
    return RandomVariable(model, kt, out)


@dataclass(frozen=True)
class CeEquivalenceReport:
    """Grid residual of U(f(y,m)) - B = Utilde(y) - Utilde(-m)."""

    equivalent: bool
    max_residual: float
    argmax: tuple[float, float]


def ce_equivalence_check(utility: UtilityFn, aggregator: AggregatorFn,
                         target: float, utilde: UtilityFn,
                         y_grid: Sequence[float] | None = None,
                         m_grid: Sequence[float] | None = None,
                         tol: float = 1e-9) -> CeEquivalenceReport:
    """Test whether the generalized shortfall (U, f, B) coincides with the
    certainty equivalent generated by Utilde, via the pointwise identity
    U(f(y, m)) - B = Utilde(y) - Utilde(-m) on a grid."""
    ys = np.linspace(-3.0, 3.0, 25) if y_grid is None else np.asarray(y_grid, float)
    ms = np.linspace(-3.0, 3.0, 25) if m_grid is None else np.asarray(m_grid, float)
    yy, mm = np.meshgrid(ys, ms, indexing="ij")
    residual = np.abs(
        utility(aggregator(yy, mm)) - target - utilde(yy) + utilde(-mm)
    )
    idx = np.unravel_index(np.argmax(residual), residual.shape)
    worst = float(residual[idx])
    return CeEquivalenceReport(
        equivalent=bool(worst < tol),
        max_residual=worst,
        argmax=(float(yy[idx]), float(mm[idx])),
    )


def hq_shortfall_spec(qparams: QParams, beta: float,
                      schedule: HorizonSchedule,
                      targets: TargetSchedule | None = None) -> ShortfallSpec:
    """The h-generalized shortfall that reproduces the hq-entropic measure
    on losses: identity utility and the hq aggregator built from
    (q, alpha_q, beta) with horizon term A(t, u) and target B_tu."""
    if targets is None:
        targets = TargetSchedule.constant(0.0)

    def aggregator(t: float, u: float) -> AggregatorFn:
        return AggregatorFn.hq(
            qparams, beta, horizon_term=schedule.integral(t, u),
            target=targets(t, u),
        )

    return ShortfallSpec(UtilityFn.linear(), aggregator, targets)


def acceptance_member(Y: RandomVariable, m, spec: ShortfallSpec, t: float,
                      u: float | None = None) -> RandomVariable:
    """Nodewise indicator (0/1 values) of E[U_u(f_u(Y, m)) | F_t] >= B_tu,
    i.e. membership of Y in the acceptance set at cash level m."""
    model = Y.model
    kt = model.depth_of(t)
    if u is None:
        u = model.times[Y.depth]
    U = spec.utility_at(u)
    f = spec.aggregator_at(t, u)
    B = spec.target_at(t, u)
    m_arr = np.asarray(m, dtype=float)
    if m_arr.ndim == 0:
        m_nodes = np.full(model.num_nodes(kt), float(m_arr))
    else:
        if m_arr.shape != (model.num_nodes(kt),):
            raise SpecificationError("m must be scalar or one value per node")
        m_nodes = m_arr
    cond = model.cond_matrix(kt, Y.depth)
    out = np.empty(model.num_nodes(kt))
    for i in range(model.num_nodes(kt)):
        level = float(np.dot(
            cond[i], U(f(Y.values, np.full_like(Y.values, m_nodes[i])))
        ))
        out[i] = 1.0 if level >= B else 0.0
    return RandomVariable(model, kt, out)
