"""Reusable axiom checkers producing reproducible reports with witnesses.

Each checker samples positions on a model, evaluates a user-supplied measure
and reports the worst slack of the axiom's defining inequality together with
a witness when it fails.  Conventions:

* ``rho`` is a callable RandomVariable -> RandomVariable (time binding done
  by the caller); the family checkers take ``rho(X, t, u)`` instead;
* sampled positions are nodewise i.i.d. uniform on [-3, 3], plus constants
  and one-atom spikes; cash shifts m come from {0, 0.1, 1, 5} (constants,
  hence F_t-measurable at every t);
* slacks are signed so that >= 0 means the axiom held; the uniform pass
  tolerance is 1e-8, and reports carry the worst slack so borderline
  numerical failures are distinguishable from structural ones;
* checkers are deterministic given the seed: reports are reproducible
  bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .probspace import FiltrationModel, RandomVariable

__all__ = [
    "AxiomReport", "check_cash_subadditive", "check_cash_additive",
    "check_monotone", "check_convex", "check_quasi_convex",
    "check_normalized", "check_restriction", "check_h_longevity",
]

TOLERANCE = 1e-8
_CASH_SHIFTS = (0.0, 0.1, 1.0, 5.0)
_LAMBDAS = (0.25, 0.5, 0.75)


@dataclass(frozen=True)
class AxiomReport:
    """Outcome of one axiom check; a failed verdict always carries a witness
    whose re-evaluation reproduces the violation."""

    axiom: str
    passed: bool
    worst_slack: float
    samples: int
    witness: dict | None = None

    def to_json_dict(self) -> dict:
        return {
            "axiom": self.axiom,
            "passed": self.passed,
            "worst_slack": self.worst_slack,
            "samples": self.samples,
            "witness": self.witness,
        }


def _sample_positions(model: FiltrationModel, depth: int, samples: int,
                      rng: np.random.Generator) -> list[RandomVariable]:
    n = model.num_nodes(depth)
    xs: list[RandomVariable] = [
        model.constant(-2.0, depth), model.constant(0.0, depth),
        model.constant(1.5, depth),
    ]
    for j in range(min(n, 3)):
        spike = np.zeros(n)
        spike[j * (n - 1) // max(1, min(n, 3) - 1) if n > 1 else 0] = 3.0 * (-1) ** j
        xs.append(RandomVariable(model, depth, spike))
    while len(xs) < samples:
        xs.append(RandomVariable(model, depth, rng.uniform(-3.0, 3.0, size=n)))
    return xs[:samples]


def _worst(report_rows: list[tuple[float, dict]], axiom: str, samples: int,
           tol: float) -> AxiomReport:
    slack, witness = min(report_rows, key=lambda r: r[0])
    passed = slack >= -tol
    return AxiomReport(axiom=axiom, passed=bool(passed),
                       worst_slack=float(slack), samples=samples,
                       witness=None if passed else witness)


def check_cash_subadditive(rho: Callable[[RandomVariable], RandomVariable],
                           model: FiltrationModel, samples: int = 20,
                           depth: int | None = None, seed: int = 0,
                           tol: float = TOLERANCE) -> AxiomReport:
    """rho(X + m) >= rho(X) - m for cash amounts m >= 0."""
    depth = model.terminal_depth if depth is None else depth
    rng = np.random.default_rng(seed)
    rows = []
    for X in _sample_positions(model, depth, samples, rng):
        base = rho(X)
        for m in _CASH_SHIFTS:
            shifted = rho(X + m)
            slack_arr = shifted.values - base.values + m
            node = int(np.argmin(slack_arr))
            rows.append((float(slack_arr[node]), {
                "x": X.values.tolist(), "m": m, "node": node,
            }))
    return _worst(rows, "cash_subadditive", samples, tol)


def check_cash_additive(rho: Callable[[RandomVariable], RandomVariable],
                        model: FiltrationModel, samples: int = 20,
                        depth: int | None = None, seed: int = 0,
                        tol: float = TOLERANCE) -> AxiomReport:
    """rho(X + m) = rho(X) - m (translation invariance), checked as
    -|rho(X+m) - rho(X) + m| >= -tol."""
    depth = model.terminal_depth if depth is None else depth
    rng = np.random.default_rng(seed)
    rows = []
    for X in _sample_positions(model, depth, samples, rng):
        base = rho(X)
        for m in _CASH_SHIFTS:
            shifted = rho(X + m)
            gap = np.abs(shifted.values - base.values + m)
            node = int(np.argmax(gap))
            rows.append((-float(gap[node]), {
                "x": X.values.tolist(), "m": m, "node": node,
            }))
    return _worst(rows, "cash_additive", samples, tol)


def check_monotone(rho: Callable[[RandomVariable], RandomVariable],
                   model: FiltrationModel, samples: int = 20,
                   depth: int | None = None, seed: int = 0,
                   tol: float = TOLERANCE) -> AxiomReport:
    """X <= Y implies rho(X) >= rho(Y) (losses shrink as payoffs grow)."""
    depth = model.terminal_depth if depth is None else depth
    rng = np.random.default_rng(seed)
    rows = []
    for X in _sample_positions(model, depth, samples, rng):
        bump = rng.uniform(0.0, 2.0, size=model.num_nodes(depth))
        Y = X + RandomVariable(model, depth, bump)
        slack_arr = rho(X).values - rho(Y).values
        node = int(np.argmin(slack_arr))
        rows.append((float(slack_arr[node]), {
            "x": X.values.tolist(), "y": Y.values.tolist(), "node": node,
        }))
    return _worst(rows, "monotone", samples, tol)


def check_convex(rho: Callable[[RandomVariable], RandomVariable],
                 model: FiltrationModel, samples: int = 20,
                 depth: int | None = None, seed: int = 0,
                 tol: float = TOLERANCE) -> AxiomReport:
    """rho(l X + (1-l) Y) <= l rho(X) + (1-l) rho(Y) on sampled mixtures."""
    depth = model.terminal_depth if depth is None else depth
    rng = np.random.default_rng(seed)
    xs = _sample_positions(model, depth, samples, rng)
    ys = _sample_positions(model, depth, samples, np.random.default_rng(seed + 1))
    rows = []
    for X, Y in zip(xs, ys):
        rx, ry = rho(X), rho(Y)
        for lam in _LAMBDAS:
            mix = rho(lam * X + (1.0 - lam) * Y)
            slack_arr = lam * rx.values + (1.0 - lam) * ry.values - mix.values
            node = int(np.argmin(slack_arr))
            rows.append((float(slack_arr[node]), {
                "x": X.values.tolist(), "y": Y.values.tolist(),
                "lambda": lam, "node": node,
            }))
    return _worst(rows, "convex", samples, tol)


def check_quasi_convex(rho: Callable[[RandomVariable], RandomVariable],
                       model: FiltrationModel, samples: int = 20,
                       depth: int | None = None, seed: int = 0,
                       tol: float = TOLERANCE) -> AxiomReport:
    """rho(l X + (1-l) Y) <= max(rho(X), rho(Y)) on sampled mixtures."""
    depth = model.terminal_depth if depth is None else depth
    rng = np.random.default_rng(seed)
    xs = _sample_positions(model, depth, samples, rng)
    ys = _sample_positions(model, depth, samples, np.random.default_rng(seed + 1))
    rows = []
    for X, Y in zip(xs, ys):
        cap = np.maximum(rho(X).values, rho(Y).values)
        for lam in _LAMBDAS:
            mix = rho(lam * X + (1.0 - lam) * Y)
            slack_arr = cap - mix.values
            node = int(np.argmin(slack_arr))
            rows.append((float(slack_arr[node]), {
                "x": X.values.tolist(), "y": Y.values.tolist(),
                "lambda": lam, "node": node,
            }))
    return _worst(rows, "quasi_convex", samples, tol)


def check_normalized(rho: Callable[[RandomVariable], RandomVariable],
                     model: FiltrationModel, depth: int | None = None,
                     tol: float = TOLERANCE) -> AxiomReport:
    """rho(0) = 0."""
    depth = model.terminal_depth if depth is None else depth
    value = rho(model.constant(0.0, depth))
    gap = np.abs(value.values)
    node = int(np.argmax(gap))
    slack = -float(gap[node])
    passed = slack >= -tol
    return AxiomReport(
        axiom="normalized", passed=bool(passed), worst_slack=slack, samples=1,
        witness=None if passed else {"rho_zero": value.values.tolist(),
                                     "node": node},
    )


def _time_triples(model: FiltrationModel) -> list[tuple[float, float, float]]:
    ts = model.times
    return [
        (ts[i], ts[j], ts[k])
        for i in range(len(ts) - 1)
        for j in range(i, len(ts) - 1)
        for k in range(j + 1, len(ts))
        if ts[j] < ts[k]
    ]


def check_restriction(rho_family: Callable[[RandomVariable, float, float],
                                           RandomVariable],
                      model: FiltrationModel, samples: int = 6, seed: int = 0,
                      tol: float = TOLERANCE) -> AxiomReport:
    """rho_tu(X) = rho_tv(X) for v >= u and F_u-measurable X."""
    rng = np.random.default_rng(seed)
    rows = []
    count = 0
    for (t, u, v) in _time_triples(model):
        ku = model.depth_of(u)
        for X in _sample_positions(model, ku, samples, rng):
            gap = np.abs(rho_family(X, t, v).values - rho_family(X, t, u).values)
            node = int(np.argmax(gap))
            rows.append((-float(gap[node]), {
                "x": X.values.tolist(), "t": t, "u": u, "v": v, "node": node,
            }))
            count += 1
    return _worst(rows, "restriction", count, tol)


def check_h_longevity(rho_family: Callable[[RandomVariable, float, float],
                                           RandomVariable],
                      model: FiltrationModel, samples: int = 6, seed: int = 0,
                      tol: float = TOLERANCE) -> AxiomReport:
    """gamma(t, u, v, X) = rho_tv(X) - rho_tu(X) >= 0 for t <= u <= v."""
    rng = np.random.default_rng(seed)
    rows = []
    count = 0
    for (t, u, v) in _time_triples(model):
        ku = model.depth_of(u)
        for X in _sample_positions(model, ku, samples, rng):
            gamma = rho_family(X, t, v).values - rho_family(X, t, u).values
            node = int(np.argmin(gamma))
            rows.append((float(gamma[node]), {
                "x": X.values.tolist(), "t": t, "u": u, "v": v, "node": node,
            }))
            count += 1
    return _worst(rows, "h_longevity", count, tol)
