import numpy as np
import pytest

from ceqaoa.bench import builtin_instances
from ceqaoa.cross_entropy import CeConfig, penalty_sampler, CeDistribution
from ceqaoa.knapsack import PenaltyPair


@pytest.fixture
def instances():
    return {inst.label: inst for inst in builtin_instances()}


@pytest.fixture
def instance_a(instances):
    return instances["A"]


@pytest.fixture
def reference_pair():
    return PenaltyPair(constraint_weight=2.7, value_weight=1.1)


def sample_valid_pairs(instance, count, seed=2024):
    """Valid penalty pairs drawn with the coupled-range scheme."""
    rng = np.random.default_rng(seed)
    config = CeConfig()
    sampler = penalty_sampler(instance, config)
    dist = CeDistribution(np.array([2.0, 2.0]), np.array([4.0, 4.0]))
    pairs = []
    for _ in range(count):
        vec = sampler(dist, rng)
        pairs.append(PenaltyPair(float(vec[0]), float(vec[1])))
    return pairs
