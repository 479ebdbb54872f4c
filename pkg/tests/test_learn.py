import math

import numpy as np
import pytest

from rmdp import ReachReward, validate
from rmdp.graph import support_graph
from rmdp.learn import (
    PacConfig,
    SampleCounts,
    contains,
    hoeffding_imdp,
    hoeffding_radius,
    pac_pipeline,
    sample_counts,
    transition_delta,
)
from rmdp.model import check_graph_preserving_model

from .conftest import point_model


def coin(p=0.5):
    return point_model(
        ["s", "g"],
        ["a"],
        "s",
        {("s", "a"): {"g": p, "s": 1 - p}, ("g", "a"): {"g": 1.0}},
        {("s", "a"): 1.0, ("g", "a"): 0.0},
    )


def dirac():
    return point_model(
        ["s", "t", "g"],
        ["a"],
        "s",
        {("s", "a"): {"t": 1.0}, ("t", "a"): {"g": 1.0}, ("g", "a"): {"g": 1.0}},
        {("s", "a"): 1.0, ("t", "a"): 1.0, ("g", "a"): 0.0},
    )


def test_config_validation():
    with pytest.raises(ValueError):
        PacConfig(0.1, 0)
    with pytest.raises(ValueError):
        PacConfig(1.0, 10)
    with pytest.raises(ValueError):
        PacConfig(0.1, 10, eps_min=0.0)


def test_hoeffding_small_sample():
    c = hoeffding_radius(10, 0.05)
    assert c == pytest.approx(math.sqrt(math.log(40) / 20), abs=1e-15)
    assert c == pytest.approx(0.429469, abs=1e-6)
    assert max(0.7 - c, 1e-6) == pytest.approx(0.270531, abs=1e-6)
    assert min(0.7 + c, 1.0) == 1.0


def test_hoeffding_large_sample():
    c = hoeffding_radius(10**6, 0.05)
    assert 2 * c == pytest.approx(0.002716, abs=1e-6)
    assert 0.5 - c == pytest.approx(0.49864, abs=1e-5)
    assert 0.5 + c == pytest.approx(0.50136, abs=1e-5)


def test_radius_scales_with_inverse_sqrt():
    for n in (1, 10, 123, 5000):
        assert hoeffding_radius(4 * n, 0.01) == pytest.approx(hoeffding_radius(n, 0.01) / 2, rel=1e-14)


def test_zero_count_gets_floor():
    truth = coin()
    counts = SampleCounts({(0, 0): 10, (1, 0): 10}, {(0, 0): (10, 0), (1, 0): (10,)}, seed=0)
    learned = hoeffding_imdp(counts, PacConfig(0.1, 10, eps_min=1e-4), truth)
    assert learned.rows[(0, 0)].lower[1] == 1e-4
    assert validate(learned) == [] and check_graph_preserving_model(learned) == []


def test_missing_samples_rejected():
    counts = SampleCounts({(0, 0): 0, (1, 0): 5}, {(0, 0): (0, 0), (1, 0): (5,)}, seed=0)
    with pytest.raises(ValueError):
        hoeffding_imdp(counts, PacConfig(0.1, 5), coin())


def test_sample_counts_basics():
    c = sample_counts(coin(), 1, seed=3)
    assert all(sum(v) == 1 for v in c.counts.values())
    d = sample_counts(dirac(), 17, seed=3)
    assert d.counts[(0, 0)] == (17,)
    assert sample_counts(coin(), 100, 9).counts == sample_counts(coin(), 100, 9).counts


def test_sample_frequencies():
    truth = coin(0.7)
    c = sample_counts(truth, 10_000, seed=2024)
    freq = np.array(c.counts[(0, 0)]) / 10_000
    assert np.all(np.abs(freq - np.array([0.7, 0.3])) <= 0.02)


def test_transition_delta_counts_every_edge():
    assert transition_delta(coin(), 0.3) == pytest.approx(0.1)


def test_learned_models_are_valid():
    for seed in range(10):
        res = pac_pipeline(coin(0.3), PacConfig(0.1, 20), ReachReward({1}), seed)
        assert validate(res.imdp) == []
        support_graph(res.imdp, strict=True)


def test_dirac_truth_is_recovered_exactly():
    res = pac_pipeline(dirac(), PacConfig(0.1, 5), ReachReward({2}), seed=1)
    assert contains(res.imdp, dirac())
    assert np.allclose(res.robust.values.values, res.nominal.values.values, atol=1e-6)


def test_robust_value_approaches_nominal():
    gaps = []
    for n in (10**2, 10**4, 10**6):
        res = pac_pipeline(coin(0.5), PacConfig(0.1, n), ReachReward({1}), seed=5)
        assert res.nominal.values[0] == pytest.approx(2.0, abs=1e-5)
        gaps.append(res.nominal.values[0] - res.robust.values[0])
    assert gaps[0] > gaps[1] > gaps[2] > 0
    assert gaps[2] < 0.02


def test_pipeline_is_deterministic():
    a = pac_pipeline(coin(0.4), PacConfig(0.1, 50), ReachReward({1}), seed=8)
    b = pac_pipeline(coin(0.4), PacConfig(0.1, 50), ReachReward({1}), seed=8)
    assert dict(a.imdp.rows) == dict(b.imdp.rows)
    assert np.array_equal(a.robust.values.values, b.robust.values.values)
