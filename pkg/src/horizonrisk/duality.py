"""Quasi-convex dual representation machinery on small finite spaces.

For a generalized shortfall with acceptance family A^m, the dual data are

    c_min(m, Q) = sup_{Y in A^m} E_Q[-Y]          (minimal penalty)
    R(x, Q)     = inf { m : c_min(m, Q) >= x }    (left inverse in m)
    rho(X)      = sup_Q R(E_Q[-X], Q)             (dual value)

together with the associated cash additive family
rho_bar_m(X) = inf { k : k + X in A^m }.

c_min is solved by a scalar Lagrangian dual: an outer bisection on the
multiplier lambda >= 0 of sup_Y [ -E_Q[Y] + lambda (E_P U(f(Y, m)) - B) ],
whose inner problem separates into per-atom 1-d concave maximizations
(ternary search on a box [-G, G]).  Every evaluated dual value upper-bounds
the primal, so the reported c_min is safe for the weak-duality inequality
dual_value <= static_shortfall.  Unbounded primals are detected by growth of
the value in the box size G (scalar API) and surface as the PLUS_INF
sentinel; an infeasible acceptance set (target above the reachable utility)
yields MINUS_INF.  All computations are static (t = 0), and spaces are
capped at 6 atoms.

The independent oracle :func:`c_min_bruteforce` enumerates Y on a grid
(starting at the declared step and refining locally) without any Lagrangian
ingredient, so the two routes stay independent.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
import numpy as np

from .errors import (InternalConsistencyError, SpecificationError,
                     TimeGridError)
from .probspace import FiltrationModel, RandomVariable
from .shortfall import ExtendedReal, RiskSentinel, ShortfallSpec, _smallest_m

__all__ = [
    "DualGrid", "DualReport", "c_min", "c_min_bruteforce", "risk_map_R",
    "dual_value", "rho_bar",
]

_MAX_ATOMS = 6
_BOX = 1000.0
_TERN_ITERS = 78           # (2/3)^78 * 2G ~ 3e-11 bracket on y
_LAMBDA_ITERS = 48         # log-bisection on lambda in [1e-12, 1e12]
_M_TOL = 1e-9
_M_CAP = float(2 ** 20)
_GROWTH_SLOPE = 1e-6


@dataclass(frozen=True)
class DualGrid:
    """Strictly positive probability vectors on the terminal atoms.

    ``simplex`` enumerates the resolution-h grid of the open simplex (all
    entries >= h), realizing the equivalent-measure set at desk scale.
    """

    measures: np.ndarray
    resolution: float = 0.0

    def __post_init__(self):
        rows = np.asarray(self.measures, dtype=float)
        if rows.ndim != 2:
            raise SpecificationError("dual grid must be a 2-d array")
        if rows.shape[1] > _MAX_ATOMS:
            raise SpecificationError(
                f"dual computations are capped at {_MAX_ATOMS} atoms"
            )
        if np.any(rows <= 0.0):
            raise SpecificationError("dual measures must be strictly positive")
        if np.max(np.abs(rows.sum(axis=1) - 1.0)) > 1e-12:
            raise SpecificationError("dual measures must sum to 1 (1e-12)")
        object.__setattr__(self, "measures", rows)

    def __len__(self) -> int:
        return self.measures.shape[0]

    @property
    def n_atoms(self) -> int:
        return self.measures.shape[1]

    @classmethod
    def simplex(cls, n_atoms: int, resolution: float) -> "DualGrid":
        if n_atoms > _MAX_ATOMS:
            raise SpecificationError(
                f"dual computations are capped at {_MAX_ATOMS} atoms"
            )
        k = round(1.0 / resolution)
        if k < n_atoms:
            raise SpecificationError("resolution too coarse for the atom count")
        rows = []
        for cuts in itertools.combinations(range(1, k), n_atoms - 1):
            parts = np.diff((0,) + cuts + (k,))
            rows.append(parts / k)
        return cls(np.array(rows), resolution=resolution)


# ---------------------------------------------------------------------------
# problem data extraction
# ---------------------------------------------------------------------------

def _static_problem(spec: ShortfallSpec, model: FiltrationModel, t: float,
                    u: float | None, depth: int | None = None,
                    atom_cap: bool = True, require_concave: bool = False):
    if t != 0.0:
        raise TimeGridError("dual computations are static (t = 0)")
    if depth is None:
        depth = model.terminal_depth
    if atom_cap and model.num_nodes(depth) > _MAX_ATOMS:
        raise SpecificationError(
            f"dual computations are capped at {_MAX_ATOMS} atoms"
        )
    if u is None:
        u = model.times[depth]
    if require_concave and spec.concavity_slack(t, u) > 1e-9:
        raise SpecificationError(
            "unsupported: U(f(y, m)) is not concave in y, so the Lagrangian "
            "dual of c_min does not apply"
        )
    U = spec.utility_at(u)
    f = spec.aggregator_at(t, u)
    B = spec.target_at(t, u)
    p = model.probs(depth)

    def uf(y, m):
        return U(f(y, m))

    return p, uf, B


# ---------------------------------------------------------------------------
# Lagrangian dual, vectorized across measure rows
# ---------------------------------------------------------------------------

def _ternary_max(objective, lo: float, hi: float, shape, iters: int):
    a = np.full(shape, lo)
    b = np.full(shape, hi)
    for _ in range(iters):
        third = (b - a) / 3.0
        c = a + third
        d = b - third
        # one stacked evaluation for both probe points
        fc, fd = objective(np.stack((c, d)))
        left = fc > fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    y = 0.5 * (a + b)
    return y, objective(y)


def _phi_eval(lam_col: np.ndarray, m_col: np.ndarray, Q: np.ndarray,
              p: np.ndarray, uf, B: float, box: float, iters: int):
    """Dual function value and constraint level at a multiplier vector.

    Returns (phi (nQ,), level (nQ,)) where level = E_P U(f(y*, m)) with y*
    the per-atom inner maximizer on [-box, box]."""

    def objective(y):
        with np.errstate(over="ignore", invalid="ignore"):
            return -Q * y + lam_col * p * uf(y, m_col)

    y_star, h_star = _ternary_max(objective, -box, box, Q.shape, iters)
    with np.errstate(over="ignore", invalid="ignore"):
        level = np.sum(p * uf(y_star, m_col), axis=1)
    phi = np.sum(h_star, axis=1) - lam_col[:, 0] * B
    return phi, level


def _cmin_batch(m: np.ndarray, Q: np.ndarray, p: np.ndarray, uf, B: float,
                box: float = _BOX, tern_iters: int = _TERN_ITERS,
                lam_iters: int = _LAMBDA_ITERS):
    """c_min(m_i, Q_i) for each row; returns (values, infeasible_mask).

    Values are finite floats (upper bounds of the primal); rows whose
    constraint cannot be met at any multiplier come back in the infeasible
    mask (c_min = -inf, the supremum over an empty acceptance set)."""
    m_col = np.asarray(m, dtype=float).reshape(-1, 1)
    llo = np.full((Q.shape[0], 1), math.log(1e-12))
    lhi = np.full((Q.shape[0], 1), math.log(1e12))
    phi_lo, lev_lo = _phi_eval(np.exp(llo), m_col, Q, p, uf, B, box, tern_iters)
    phi_hi, lev_hi = _phi_eval(np.exp(lhi), m_col, Q, p, uf, B, box, tern_iters)
    infeasible = lev_hi < B
    # rows already satisfied at lambda ~ 0 sit at the unconstrained corner
    at_zero = lev_lo >= B
    lhi = np.where(at_zero[:, None], llo, lhi)
    for _ in range(lam_iters):
        mid = 0.5 * (llo + lhi)
        _, lev = _phi_eval(np.exp(mid), m_col, Q, p, uf, B, box, tern_iters)
        take_hi = (lev >= B)[:, None]
        lhi = np.where(take_hi, mid, lhi)
        llo = np.where(take_hi, llo, mid)
    phi_a, _ = _phi_eval(np.exp(llo), m_col, Q, p, uf, B, box, tern_iters)
    phi_b, _ = _phi_eval(np.exp(lhi), m_col, Q, p, uf, B, box, tern_iters)
    values = np.minimum(np.minimum(phi_a, phi_b), np.minimum(phi_lo, phi_hi))
    return values, infeasible


def c_min(m: float, Q: np.ndarray, spec: ShortfallSpec,
          model: FiltrationModel, t: float = 0.0, u: float | None = None,
          cross_check: bool = False) -> ExtendedReal:
    """Minimal penalty c_min(m, Q) = sup{ E_Q[-Y] : E_P[U(f(Y, m))] >= B }.

    Solved by the Lagrangian dual with per-atom inner maximizations; the
    computation runs at two box sizes and reports PLUS_INF when the value
    grows with the box (unbounded transfer along a mismatched atom).  With
    ``cross_check`` the staged-grid oracle is run as well (n <= 3 atoms) and
    a disagreement beyond 5e-3 raises InternalConsistencyError."""
    Q = np.asarray(Q, dtype=float)
    p, uf, B = _static_problem(spec, model, t, u, require_concave=True)
    if Q.shape != p.shape:
        raise SpecificationError("Q must be a probability vector on the atoms")
    v1, bad1 = _cmin_batch(np.array([m]), Q[None, :], p, uf, B, box=_BOX)
    if bool(bad1[0]):
        return RiskSentinel.MINUS_INF
    v2, _ = _cmin_batch(np.array([m]), Q[None, :], p, uf, B, box=2.0 * _BOX)
    result: ExtendedReal
    if (v2[0] - v1[0]) / _BOX > _GROWTH_SLOPE:
        result = RiskSentinel.PLUS_INF
    else:
        result = float(v1[0])
    if cross_check and len(p) <= 3:
        oracle = c_min_bruteforce(m, Q, spec, model, t=t, u=u)
        both_finite = isinstance(result, float) and isinstance(oracle, float)
        if both_finite and abs(result - oracle) > 5e-3:
            raise InternalConsistencyError(
                f"c_min Lagrangian value {result!r} disagrees with the grid "
                f"oracle {oracle!r} beyond 5e-3"
            )
        if isinstance(result, RiskSentinel) != isinstance(oracle, RiskSentinel):
            raise InternalConsistencyError(
                f"c_min sentinel mismatch: dual {result!r} vs oracle {oracle!r}"
            )
    return result


def c_min_bruteforce(m: float, Q: np.ndarray, spec: ShortfallSpec,
                     model: FiltrationModel, t: float = 0.0,
                     u: float | None = None, box: float = 20.0,
                     step: float = 0.05, refine_rounds: int = 4,
                     n_starts: int = 5) -> ExtendedReal:
    """Enumeration oracle for c_min: maximize E_Q[-Y] over feasible grid
    points Y in [-box, box]^n, then refine the grid locally.  Purely
    constructive; shares nothing with the Lagrangian route.

    The objective is often nearly flat along the binding constraint surface,
    so a single coarse incumbent can localize the wrong stretch of it; the
    refinement therefore restarts from the ``n_starts`` best well-separated
    coarse candidates and keeps the overall winner.  An optimum pinned to
    the lower box edge signals an unbounded transfer and returns PLUS_INF
    (the value grows with the box)."""
    Q = np.asarray(Q, dtype=float)
    p, uf, B = _static_problem(spec, model, t, u)
    n = len(p)
    if n > 3:
        raise SpecificationError("the grid oracle is limited to 3 atoms")
    first_step = step if n <= 2 else max(step, 0.4)
    axes = [np.arange(-box, box + first_step / 2, first_step)] * n
    starts = _grid_scan(axes, Q, p, uf, B, m, keep=4 * n_starts)
    starts = _well_separated(starts, 2.0 * first_step)[:n_starts]
    if not starts:
        return RiskSentinel.MINUS_INF
    best, best_y = -math.inf, None
    for val, y0 in starts:
        cur_val, cur_y = val, y0
        cur_step = first_step
        for _ in range(refine_rounds + (1 if n == 3 else 0)):
            new_step = cur_step / 8.0
            local = [
                np.arange(c - 2.0 * cur_step,
                          c + 2.0 * cur_step + new_step / 2, new_step)
                for c in cur_y
            ]
            found = _grid_scan(local, Q, p, uf, B, m, keep=1)
            if found and found[0][0] > cur_val:
                cur_val, cur_y = found[0]
            cur_step = new_step
        if cur_val > best:
            best, best_y = cur_val, cur_y
    if np.min(best_y) <= -box + first_step:
        return RiskSentinel.PLUS_INF
    return float(best)


def _well_separated(candidates, min_gap):
    """Greedy filter keeping value-sorted candidates pairwise min_gap apart."""
    kept: list[tuple[float, np.ndarray]] = []
    for val, y in candidates:
        if all(np.max(np.abs(y - other)) >= min_gap for _, other in kept):
            kept.append((val, y))
    return kept


def _grid_scan(axes, Q, p, uf, B, m, keep=1):
    """Top feasible points of E_Q[-Y] over the tensor grid, best first;
    chunked over axis 0 to bound memory."""
    n = len(axes)
    tail = np.meshgrid(*axes[1:], indexing="ij") if n > 1 else []
    tail_flat = [g.ravel() for g in tail]
    found: list[tuple[float, np.ndarray]] = []
    chunk = max(1, int(2e6 // max(1, len(tail_flat[0]) if tail_flat else 1)))
    axis0 = axes[0]
    for lo in range(0, len(axis0), chunk):
        a0 = axis0[lo:lo + chunk]
        if n == 1:
            ys = a0[:, None]
        else:
            cols = [np.repeat(a0, len(tail_flat[0]))]
            cols += [np.tile(tf, len(a0)) for tf in tail_flat]
            ys = np.column_stack(cols)
        with np.errstate(over="ignore", invalid="ignore"):
            level = uf(ys, np.full((len(ys), 1), float(m))) @ p
        feasible = level >= B
        if not np.any(feasible):
            continue
        obj = -(ys @ Q)
        obj[~feasible] = -np.inf
        top = min(keep, len(obj))
        idx = np.argpartition(-obj, top - 1)[:top]
        for i in idx:
            if np.isfinite(obj[i]):
                found.append((float(obj[i]), ys[i].copy()))
    found.sort(key=lambda pair: -pair[0])
    return found[:keep]


# ---------------------------------------------------------------------------
# left inverse R and the dual supremum
# ---------------------------------------------------------------------------

def _risk_map_batch(x: np.ndarray, Q: np.ndarray, p: np.ndarray, uf, B: float,
                    box: float = _BOX):
    """R(x_i, Q_i) rowwise by bisection over m on the monotone predicate
    c_min(m, Q) >= x.  Returns (values, plus_mask, minus_mask).

    Bracketing and the wide bisection phase run the Lagrangian at coarse
    inner precision; once brackets are below 1e-4 the full precision takes
    over (the coarse value error is second order at the smooth optima that
    decide the supremum)."""
    nq = len(x)
    start = 1.0 + 2.0 * float(np.max(np.abs(x), initial=0.0))

    def predicate(m_vec, fine: bool):
        tern = _TERN_ITERS if fine else 42
        lam = _LAMBDA_ITERS if fine else 30
        vals, infeasible = _cmin_batch(m_vec, Q, p, uf, B, box=box,
                                       tern_iters=tern, lam_iters=lam)
        out = vals >= x
        out[infeasible] = False
        return out

    hi = np.full(nq, start)
    ok_hi = predicate(hi, fine=False)
    for _ in range(25):
        if np.all(ok_hi) or np.all(hi >= _M_CAP):
            break
        hi = np.where(ok_hi, hi, np.minimum(hi * 2.0, _M_CAP * 2.0))
        ok_hi = predicate(hi, fine=False) | ok_hi
    plus_mask = ~ok_hi  # constraint value never reaches x
    lo = np.full(nq, -start)
    ok_lo = predicate(lo, fine=False)
    for _ in range(25):
        if not np.any(ok_lo) or np.all(lo <= -_M_CAP):
            break
        lo = np.where(ok_lo, np.maximum(lo * 2.0, -_M_CAP * 2.0), lo)
        ok_lo = predicate(lo, fine=False) & ok_lo
    minus_mask = ok_lo & ~plus_mask  # met even at the cap: R = -inf
    active = ~(plus_mask | minus_mask)
    for _ in range(90):
        if not np.any(active):
            break
        width = float(np.max((hi - lo)[active]))
        if width <= _M_TOL:
            break
        mid = 0.5 * (lo + hi)
        ok = predicate(mid, fine=width <= 1e-4)
        hi = np.where(active & ok, mid, hi)
        lo = np.where(active & ~ok, mid, lo)
    values = 0.5 * (lo + hi)
    return values, plus_mask, minus_mask


def risk_map_R(x: float, Q: np.ndarray, spec: ShortfallSpec,
               model: FiltrationModel, t: float = 0.0,
               u: float | None = None) -> ExtendedReal:
    """Left inverse R(x, Q) = inf{ m : c_min(m, Q) >= x }; MINUS_INF when
    the constraint holds below every bracket -- x below inf_m c_min, which
    includes measures with c_min identically +inf -- and PLUS_INF when it is
    never met.  The MINUS_INF classification is confirmed by re-running at a
    doubled box: a genuinely divergent c_min drags R down with the box."""
    Q = np.asarray(Q, dtype=float)
    p, uf, B = _static_problem(spec, model, t, u, require_concave=True)
    x_arr = np.array([float(x)])
    vals, plus, minus = _risk_map_batch(x_arr, Q[None, :], p, uf, B)
    if bool(plus[0]):
        return RiskSentinel.PLUS_INF
    if bool(minus[0]):
        return RiskSentinel.MINUS_INF
    vals2, plus2, minus2 = _risk_map_batch(x_arr, Q[None, :], p, uf, B,
                                           box=2.0 * _BOX)
    if bool(minus2[0]) or float(vals[0] - vals2[0]) > _GROWTH_SLOPE * _BOX:
        return RiskSentinel.MINUS_INF
    return float(vals[0])


@dataclass(frozen=True)
class DualReport:
    """Dual supremum with the achieving measure and the per-row table
    (E_Q[-X] and R values, with +-inf markers for sentinel rows)."""

    value: ExtendedReal
    best_index: int
    best_q: np.ndarray = field(repr=False)
    x_values: np.ndarray = field(repr=False)
    r_values: np.ndarray = field(repr=False)


def dual_value(X: RandomVariable, spec: ShortfallSpec, grid: DualGrid,
               t: float = 0.0, u: float | None = None) -> DualReport:
    """Quasi-convex dual representation sup_Q R(E_Q[-X], Q) over the grid.

    Lower-bounds the static shortfall (weak duality); the gap closes as the
    grid refines."""
    model = X.model
    if X.depth != model.terminal_depth:
        raise TimeGridError("dual evaluation expects a terminal-depth X")
    p, uf, B = _static_problem(spec, model, t, u, require_concave=True)
    Q = grid.measures
    if grid.n_atoms != len(p):
        raise SpecificationError("grid atom count does not match the model")
    x = Q @ (-X.values)
    vals, plus, minus = _risk_map_batch(x, Q, p, uf, B)
    r = vals.copy()
    r[plus] = np.inf
    r[minus] = -np.inf
    best = int(np.argmax(r))
    value: ExtendedReal
    if np.isposinf(r[best]):
        value = RiskSentinel.PLUS_INF
    elif np.isneginf(r[best]):
        value = RiskSentinel.MINUS_INF
    else:
        value = float(r[best])
    return DualReport(value=value, best_index=best, best_q=Q[best].copy(),
                      x_values=x, r_values=r)


def rho_bar(m: float, X: RandomVariable, spec: ShortfallSpec,
            t: float = 0.0, u: float | None = None) -> ExtendedReal:
    """Cash additive member rho_bar_m(X) = inf{ k : k + X in A^m } of the
    family associated with the quasi-convex measure; decreasing in m, with
    rho_bar_{m+d}(X) <= rho_bar_m(X) - d under cash subadditivity."""
    model = X.model
    p, uf, B = _static_problem(spec, model, t, u, depth=X.depth,
                               atom_cap=False)
    xvals = X.values

    def constraint(k: float) -> float:
        with np.errstate(over="ignore", invalid="ignore"):
            return float(np.dot(p, uf(xvals + k, np.full_like(xvals, float(m)))))

    start = 1.0 + 2.0 * (X.max_abs() + abs(m))
    return _smallest_m(constraint, B, start=start)
