"""Finite filtered probability models: scenario trees, binomial lattices,
node-indexed random variables and adapted processes.

Two model families share one interface:

* :class:`ScenarioTree` -- a general finite tree with explicit nodes, one
  parent per node and positive branch probabilities.  Supports JSON
  round-trips and measure changes.  Intended for small hand-built or
  randomly generated examples (depth <= 6).
* :class:`BrownianLattice` -- a recombining binomial lattice discretizing a
  one-dimensional Brownian motion, stored compactly (k+1 states at depth k)
  so that fine grids (N = 64 and beyond) stay cheap.

A :class:`RandomVariable` holds one value per node at a fixed depth and is
F_k-measurable by construction; an :class:`AdaptedProcess` holds one such
layer per depth up to a horizon.
"""

from __future__ import annotations

import json
import math
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DomainError, TimeGridError, TreeStructureError

_PROB_TOL = 1e-12
_DENSITY_MEAN_TOL = 1e-10


def _check_times(times: Sequence[float]) -> tuple[float, ...]:
    ts = tuple(float(t) for t in times)
    if len(ts) < 2:
        raise TimeGridError("time grid needs at least two points")
    if abs(ts[0]) > 0.0:
        raise TimeGridError(f"time grid must start at 0, got {ts[0]}")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise TimeGridError(f"time grid must be strictly increasing: {ts}")
    return ts


class FiltrationModel:
    """Common interface of finite filtered models.

    Subclasses provide the node layout per depth, cumulative node
    probabilities and the one-step conditional expectation; everything else
    (iterated conditioning, conditional transition matrices, expectations)
    is derived here.
    """

    times: tuple[float, ...]

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def horizon(self) -> float:
        return self.times[-1]

    @property
    def terminal_depth(self) -> int:
        return self.n_steps

    def depth_of(self, t: float) -> int:
        """Map a grid time to its depth index (tolerance 1e-9)."""
        for k, tk in enumerate(self.times):
            if abs(tk - t) <= 1e-9:
                return k
        raise TimeGridError(f"time {t} is not on the grid {self.times}")

    def dt(self, k: int) -> float:
        return self.times[k + 1] - self.times[k]

    # -- layout hooks -----------------------------------------------------
    def num_nodes(self, depth: int) -> int:
        raise NotImplementedError

    def probs(self, depth: int) -> np.ndarray:
        """Cumulative probabilities of the depth-k nodes (sums to 1)."""
        raise NotImplementedError

    def step_expectation(self, values: np.ndarray, depth: int) -> np.ndarray:
        """E[. | F_depth] applied to a depth+1 value layer."""
        raise NotImplementedError

    # -- derived operations ----------------------------------------------
    def _check_depth(self, depth: int) -> None:
        if not 0 <= depth <= self.terminal_depth:
            raise TimeGridError(
                f"depth {depth} outside [0, {self.terminal_depth}]"
            )

    def cond_expectation(self, values: np.ndarray, from_depth: int,
                         to_depth: int) -> np.ndarray:
        self._check_depth(from_depth)
        self._check_depth(to_depth)
        if to_depth > from_depth:
            raise TimeGridError(
                f"target depth {to_depth} exceeds source depth {from_depth}"
            )
        out = np.asarray(values, dtype=float)
        for k in range(from_depth - 1, to_depth - 1, -1):
            out = self.step_expectation(out, k)
        return out

    def cond_matrix(self, from_depth: int, to_depth: int) -> np.ndarray:
        """Conditional probabilities P(node j at to_depth | node i at from_depth),
        shape (num_nodes(from_depth), num_nodes(to_depth))."""
        self._check_depth(from_depth)
        self._check_depth(to_depth)
        if to_depth < from_depth:
            raise TimeGridError("cond_matrix requires from_depth <= to_depth")
        n_to = self.num_nodes(to_depth)
        rows = np.empty((self.num_nodes(from_depth), n_to))
        eye = np.eye(n_to)
        for j in range(n_to):
            rows[:, j] = self.cond_expectation(eye[j], to_depth, from_depth)
        return rows

    def constant(self, value: float, depth: int | None = None) -> RandomVariable:
        if depth is None:
            depth = self.terminal_depth
        self._check_depth(depth)
        return RandomVariable(
            self, depth, np.full(self.num_nodes(depth), float(value))
        )

    def expectation(self, X: "RandomVariable") -> float:
        return float(np.dot(self.probs(X.depth), X.values))


class ScenarioTree(FiltrationModel):
    """General finite tree model.

    Nodes are given as ``(id, depth, parent, p)`` where ``p`` is the
    conditional branch probability.  Ids must be ``0..n-1`` with the root at
    id 0, depth 0 and ``p = 1``.  At every non-terminal node the children's
    branch probabilities are strictly positive and sum to one (tolerance
    1e-12); every non-terminal node has at least one child and all leaves sit
    at the final depth.  Instances are immutable after construction.
    """

    def __init__(self, times: Sequence[float],
                 nodes: Iterable[tuple[int, int, int | None, float]]):
        self.times = _check_times(times)
        entries = sorted(nodes, key=lambda e: e[0])
        n = len(entries)
        if [e[0] for e in entries] != list(range(n)):
            raise TreeStructureError("node ids must be exactly 0..n-1")
        self._depth = np.array([e[1] for e in entries], dtype=int)
        self._parent = np.array(
            [-1 if e[2] is None else int(e[2]) for e in entries], dtype=int
        )
        self._branch_p = np.array([e[3] for e in entries], dtype=float)
        self._validate_structure()
        self._build_layout()
        self._validate_probabilities()

    def _validate_structure(self) -> None:
        if self._depth[0] != 0 or self._parent[0] != -1:
            raise TreeStructureError("node 0 must be the root (depth 0, no parent)")
        if np.count_nonzero(self._parent < 0) != 1:
            raise TreeStructureError("exactly one root node allowed")
        n = len(self._depth)
        children: list[list[int]] = [[] for _ in range(n)]
        for i in range(1, n):
            p = self._parent[i]
            if not 0 <= p < n:
                raise TreeStructureError(f"node {i} has invalid parent {p}")
            if self._depth[i] != self._depth[p] + 1:
                raise TreeStructureError(
                    f"node {i} depth {self._depth[i]} != parent depth + 1"
                )
            children[p].append(i)
        self._children = children
        last = self.terminal_depth
        for i in range(n):
            if self._depth[i] > last:
                raise TreeStructureError(
                    f"node {i} deeper than the time grid allows"
                )
            if self._depth[i] < last and not children[i]:
                raise TreeStructureError(
                    f"non-terminal node {i} (depth {self._depth[i]}) has no children"
                )

    def _build_layout(self) -> None:
        last = self.terminal_depth
        self._slots: list[np.ndarray] = [
            np.flatnonzero(self._depth == k) for k in range(last + 1)
        ]
        if len(self._slots[0]) != 1:
            raise TreeStructureError("exactly one node at depth 0 required")
        n = len(self._depth)
        self._slot_index = np.empty(n, dtype=int)
        for ids in self._slots:
            self._slot_index[ids] = np.arange(len(ids))
        cum = np.empty(n)
        cum[0] = self._branch_p[0]
        order = np.argsort(self._depth, kind="stable")
        for i in order:
            if self._parent[i] >= 0:
                cum[i] = cum[self._parent[i]] * self._branch_p[i]
        self._cum = cum

    def _validate_probabilities(self) -> None:
        if abs(self._branch_p[0] - 1.0) > _PROB_TOL:
            raise TreeStructureError("root probability must be 1")
        for i, kids in enumerate(self._children):
            if not kids:
                continue
            ps = self._branch_p[kids]
            if np.any(ps <= 0.0):
                raise TreeStructureError(
                    f"node {i} has a non-positive child branch probability"
                )
            if abs(ps.sum() - 1.0) > _PROB_TOL:
                raise TreeStructureError(
                    f"children of node {i} have probabilities summing to "
                    f"{ps.sum()!r}, not 1"
                )

    # -- FiltrationModel hooks ---------------------------------------------
    def num_nodes(self, depth: int) -> int:
        self._check_depth(depth)
        return len(self._slots[depth])

    def probs(self, depth: int) -> np.ndarray:
        self._check_depth(depth)
        return self._cum[self._slots[depth]].copy()

    def step_expectation(self, values: np.ndarray, depth: int) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        child_ids = self._slots[depth + 1]
        weighted = self._branch_p[child_ids] * values
        out = np.zeros(self.num_nodes(depth))
        np.add.at(out, self._slot_index[self._parent[child_ids]], weighted)
        return out

    # -- tree-specific operations -------------------------------------------
    def node_ids(self, depth: int) -> np.ndarray:
        self._check_depth(depth)
        return self._slots[depth].copy()

    def parent_slot(self, depth: int) -> np.ndarray:
        """For each depth-k node, the slot of its parent at depth k-1."""
        if depth == 0:
            raise TimeGridError("root has no parent")
        ids = self._slots[depth]
        return self._slot_index[self._parent[ids]]

    def lift(self, values: np.ndarray, from_depth: int, to_depth: int) -> np.ndarray:
        """Extend an F_k layer along paths: each node inherits its ancestor's
        value.  Only trees support lifting (lattice states recombine)."""
        out = np.asarray(values, dtype=float)
        for k in range(from_depth + 1, to_depth + 1):
            out = out[self.parent_slot(k)]
        return out

    def to_json_dict(self) -> dict:
        nodes = []
        for i in range(len(self._depth)):
            nodes.append({
                "id": int(i),
                "depth": int(self._depth[i]),
                "parent": None if self._parent[i] < 0 else int(self._parent[i]),
                "p": float(self._branch_p[i]),
            })
        return {"times": list(self.times), "nodes": nodes}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, data: dict) -> "ScenarioTree":
        nodes = [
            (nd["id"], nd["depth"], nd["parent"], nd["p"])
            for nd in data["nodes"]
        ]
        return cls(data["times"], nodes)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioTree":
        return cls.from_json_dict(json.loads(text))

    @classmethod
    def terminal_atoms(cls, probabilities: Sequence[float],
                       times: Sequence[float] = (0.0, 1.0)) -> "ScenarioTree":
        """One-period tree whose terminal atoms carry the given probabilities."""
        nodes = [(0, 0, None, 1.0)]
        for j, p in enumerate(probabilities):
            nodes.append((j + 1, 1, 0, float(p)))
        return cls(times, nodes)

    @classmethod
    def random(cls, rng: np.random.Generator, depth: int = 3,
               max_branching: int = 3, times: Sequence[float] | None = None
               ) -> "ScenarioTree":
        """Random tree with branching factors in {2..max_branching} and
        Dirichlet-ish strictly positive branch probabilities."""
        if times is None:
            times = [k / depth for k in range(depth + 1)]
        nodes: list[tuple[int, int, int | None, float]] = [(0, 0, None, 1.0)]
        frontier = [0]
        next_id = 1
        for k in range(depth):
            new_frontier = []
            for parent in frontier:
                width = int(rng.integers(2, max_branching + 1))
                raw = 0.2 + rng.random(width)
                ps = raw / raw.sum()
                for b in range(width):
                    nodes.append((next_id, k + 1, parent, float(ps[b])))
                    new_frontier.append(next_id)
                    next_id += 1
            frontier = new_frontier
        return cls(times, nodes)

    def change_measure(self, density: "RandomVariable") -> "ScenarioTree":
        """Reweight branch probabilities with a positive terminal density of
        mean one, realizing an equivalent measure dQ/dP on the tree.

        The terminal cumulative probabilities of the returned tree equal
        P(omega) * density(omega); the node layout is unchanged.
        """
        if density.model is not self:
            raise TreeStructureError("density must live on this tree")
        if density.depth != self.terminal_depth:
            raise TreeStructureError("density must be terminal-depth measurable")
        dens = np.asarray(density.values, dtype=float)
        if np.any(dens <= 0.0):
            raise DomainError("density must be strictly positive")
        mean = float(np.dot(self.probs(self.terminal_depth), dens))
        if abs(mean - 1.0) > _DENSITY_MEAN_TOL:
            raise DomainError(f"density mean {mean!r} differs from 1 beyond 1e-10")
        n = len(self._depth)
        new_cum = np.zeros(n)
        term_ids = self._slots[self.terminal_depth]
        new_cum[term_ids] = self._cum[term_ids] * dens / mean
        for k in range(self.terminal_depth, 0, -1):
            ids = self._slots[k]
            np.add.at(new_cum, self._parent[ids], new_cum[ids])
        nodes: list[tuple[int, int, int | None, float]] = [(0, 0, None, 1.0)]
        for i in range(1, n):
            p = new_cum[i] / new_cum[self._parent[i]]
            nodes.append((i, int(self._depth[i]), int(self._parent[i]), float(p)))
        return ScenarioTree(self.times, nodes)


class BrownianLattice(FiltrationModel):
    """Recombining binomial discretization of a 1-d Brownian motion.

    At depth k the state i in {0..k} counts up-moves; the Brownian value is
    (2i - k) * sqrt(dt) and each step moves +-sqrt(dt) with probability 1/2,
    so per-step increments have conditional mean 0 and variance dt exactly.
    ``up_probs`` other than 1/2 arise from deterministic measure tilts
    (discrete Girsanov) and keep the lattice recombining.
    """

    def __init__(self, n_steps: int, horizon: float = 1.0,
                 up_probs: np.ndarray | None = None):
        if n_steps < 1:
            raise TimeGridError("lattice needs at least one step")
        if horizon <= 0:
            raise TimeGridError("horizon must be positive")
        self.times = tuple(horizon * k / n_steps for k in range(n_steps + 1))
        self._dt = horizon / n_steps
        self._sqdt = math.sqrt(self._dt)
        if up_probs is None:
            self._up = np.full(n_steps, 0.5)
        else:
            self._up = np.asarray(up_probs, dtype=float)
            if self._up.shape != (n_steps,):
                raise TreeStructureError("up_probs must have one entry per step")
            if np.any(self._up <= 0.0) or np.any(self._up >= 1.0):
                raise TreeStructureError("up probabilities must lie in (0, 1)")

    @property
    def step_dt(self) -> float:
        return self._dt

    @property
    def sqrt_dt(self) -> float:
        return self._sqdt

    def num_nodes(self, depth: int) -> int:
        self._check_depth(depth)
        return depth + 1

    def probs(self, depth: int) -> np.ndarray:
        self._check_depth(depth)
        dist = np.array([1.0])
        for k in range(depth):
            nxt = np.zeros(k + 2)
            nxt[1:] += self._up[k] * dist
            nxt[:-1] += (1.0 - self._up[k]) * dist
            dist = nxt
        return dist

    def step_expectation(self, values: np.ndarray, depth: int) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        p = self._up[depth]
        return p * values[1:] + (1.0 - p) * values[:-1]

    def step_z(self, values: np.ndarray, depth: int) -> np.ndarray:
        """E[Y_{k+1} dB_k | F_k] / dt -- the exact discrete gradient."""
        values = np.asarray(values, dtype=float)
        p = self._up[depth]
        return (p * values[1:] - (1.0 - p) * values[:-1]) / self._sqdt

    def brownian(self, depth: int) -> np.ndarray:
        self._check_depth(depth)
        return (2.0 * np.arange(depth + 1) - depth) * self._sqdt

    def brownian_rv(self, depth: int | None = None) -> "RandomVariable":
        if depth is None:
            depth = self.terminal_depth
        return RandomVariable(self, depth, self.brownian(depth))

    def tilted(self, shift: Callable[[float], float]) -> "BrownianLattice":
        """Lattice under the equivalent measure with per-step density factor
        exp(shift(t_k) dB_k - shift(t_k)^2 dt / 2), each factor normalized to
        conditional mean one.  The Brownian geometry is unchanged; only the
        up probabilities move."""
        ups = np.empty(self.n_steps)
        for k in range(self.n_steps):
            x = float(shift(self.times[k])) * self._sqdt
            if abs(x) > 350.0:
                raise DomainError("measure tilt too large to normalize")
            ups[k] = math.exp(x) / (math.exp(x) + math.exp(-x))
        return BrownianLattice(self.n_steps, self.horizon, ups)


class RandomVariable:
    """F_k-measurable random variable: one value per depth-k node.

    Arithmetic requires operands on the same model; on trees, operands at
    different depths are lifted along paths to the deeper one.
    """

    __slots__ = ("model", "depth", "values")

    def __init__(self, model: FiltrationModel, depth: int, values):
        model._check_depth(depth)
        vals = np.asarray(values, dtype=float)
        if vals.shape != (model.num_nodes(depth),):
            raise TreeStructureError(
                f"expected {model.num_nodes(depth)} values at depth {depth}, "
                f"got shape {vals.shape}"
            )
        self.model = model
        self.depth = depth
        self.values = vals

    def _align(self, other: "RandomVariable") -> tuple[np.ndarray, np.ndarray, int]:
        if other.model is not self.model:
            raise TreeStructureError("operands live on different models")
        if other.depth == self.depth:
            return self.values, other.values, self.depth
        if not isinstance(self.model, ScenarioTree):
            raise TreeStructureError(
                "depth-mismatched arithmetic needs a ScenarioTree (lattice "
                "states do not determine earlier states)"
            )
        target = max(self.depth, other.depth)
        a = self.model.lift(self.values, self.depth, target)
        b = self.model.lift(other.values, other.depth, target)
        return a, b, target

    def _binary(self, other, op) -> "RandomVariable":
        if isinstance(other, RandomVariable):
            a, b, depth = self._align(other)
            return RandomVariable(self.model, depth, op(a, b))
        return RandomVariable(self.model, self.depth, op(self.values, other))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: np.subtract(b, a))

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, np.divide)

    def __neg__(self):
        return RandomVariable(self.model, self.depth, -self.values)

    def apply(self, fn: Callable[[np.ndarray], np.ndarray]) -> "RandomVariable":
        return RandomVariable(self.model, self.depth, fn(self.values))

    def neg_part(self) -> "RandomVariable":
        """max(-X, 0), the negative-part payoff transform used on losses."""
        return RandomVariable(self.model, self.depth, np.maximum(-self.values, 0.0))

    def condexp(self, depth: int) -> "RandomVariable":
        vals = self.model.cond_expectation(self.values, self.depth, depth)
        return RandomVariable(self.model, depth, vals)

    def expectation(self) -> float:
        return self.model.expectation(self)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def __repr__(self) -> str:
        return (f"RandomVariable(depth={self.depth}, "
                f"values={np.array2string(self.values, precision=6)})")


class AdaptedProcess:
    """One value layer per depth from 0 up to a horizon depth."""

    __slots__ = ("model", "layers")

    def __init__(self, model: FiltrationModel, layers: Sequence[np.ndarray]):
        if not layers:
            raise TreeStructureError("adapted process needs at least one layer")
        self.model = model
        checked = []
        for k, layer in enumerate(layers):
            arr = np.asarray(layer, dtype=float)
            if arr.shape != (model.num_nodes(k),):
                raise TreeStructureError(
                    f"layer {k} has shape {arr.shape}, expected "
                    f"({model.num_nodes(k)},)"
                )
            checked.append(arr)
        self.layers = checked

    @property
    def horizon_depth(self) -> int:
        return len(self.layers) - 1

    def at_depth(self, depth: int) -> RandomVariable:
        if not 0 <= depth <= self.horizon_depth:
            raise TimeGridError(f"depth {depth} outside process horizon")
        return RandomVariable(self.model, depth, self.layers[depth].copy())

    @classmethod
    def constant(cls, model: FiltrationModel, value: float,
                 horizon_depth: int | None = None) -> "AdaptedProcess":
        if horizon_depth is None:
            horizon_depth = model.terminal_depth
        return cls(model, [np.full(model.num_nodes(k), float(value))
                           for k in range(horizon_depth + 1)])


def conditional_expectation(X: RandomVariable, depth: int) -> RandomVariable:
    """E[X | F_depth] as an exact weighted average over descendants."""
    return X.condexp(depth)


def change_measure(tree: ScenarioTree, density: RandomVariable) -> ScenarioTree:
    """Equivalent-measure change on a tree; see :meth:`ScenarioTree.change_measure`."""
    return tree.change_measure(density)
