import numpy as np
import pytest

from horizonrisk import RandomVariable, ScenarioTree


@pytest.fixture
def two_atom():
    """One-period fair coin: the workhorse of the hand-checked examples."""
    return ScenarioTree.terminal_atoms([0.5, 0.5])


@pytest.fixture
def coin_position(two_atom):
    return RandomVariable(two_atom, 1, [1.0, -1.0])


def random_tree(seed, depth=3, max_branching=3, times=None):
    rng = np.random.default_rng(seed)
    return ScenarioTree.random(rng, depth=depth, max_branching=max_branching,
                               times=times)


def random_rv(tree, seed, depth=None, low=-3.0, high=3.0):
    rng = np.random.default_rng(seed)
    depth = tree.terminal_depth if depth is None else depth
    return RandomVariable(tree, depth,
                          rng.uniform(low, high, tree.num_nodes(depth)))
