import numpy as np
import pytest

from rmdp import ModelError, StationaryPolicy, enabled_actions, induce_dtmc, validate
from rmdp.model import check_policy

from .conftest import interval_model, l1_model, memdp_model, point_model


def two_state(p_stay=0.5, reward=1.0):
    return point_model(
        ["s0", "s1"],
        ["a"],
        "s0",
        {("s0", "a"): {"s0": p_stay, "s1": 1.0 - p_stay}, ("s1", "a"): {"s1": 1.0}},
        {("s0", "a"): reward, ("s1", "a"): 0.0},
    )


def rules(model):
    return [d.rule for d in validate(model)]


def test_valid_model_has_no_diagnostics():
    assert validate(two_state()) == []


def test_row_not_stochastic():
    m = point_model(
        ["s0", "s1"],
        ["a"],
        "s0",
        {("s0", "a"): {"s0": 0.5, "s1": 0.4}, ("s1", "a"): {"s1": 1.0}},
        {("s0", "a"): 1.0, ("s1", "a"): 0.0},
    )
    diags = validate(m)
    assert len(diags) == 1
    assert str(diags[0]) == "row-not-stochastic at (s0,a)"


def test_interval_zero_lower_nonzero_upper():
    m = interval_model(
        ["s0", "s1"],
        ["a"],
        "s0",
        {("s0", "a"): {"s0": (0.0, 0.3), "s1": (0.7, 1.0)}, ("s1", "a"): {"s1": (1.0, 1.0)}},
        {("s0", "a"): 1.0, ("s1", "a"): 0.0},
    )
    assert rules(m) == ["zero-lower-nonzero-upper"]


def test_interval_feasibility_rules():
    m = interval_model(
        ["s0", "s1"],
        ["a"],
        "s0",
        {("s0", "a"): {"s0": (0.6, 0.7), "s1": (0.6, 0.7)}, ("s1", "a"): {"s1": (0.1, 0.5)}},
        {("s0", "a"): 1.0, ("s1", "a"): 0.0},
    )
    assert set(rules(m)) == {"lower-bounds-exceed-one", "upper-bounds-below-one"}


def test_negative_reward_and_missing_reward():
    m = point_model(
        ["s0"],
        ["a", "b"],
        "s0",
        {("s0", "a"): {"s0": 1.0}, ("s0", "b"): {"s0": 1.0}},
        {("s0", "a"): -1.0},
    )
    assert set(rules(m)) == {"negative-or-nonfinite-reward", "transition-without-reward"}


def test_reward_without_transition_and_deadlock():
    m = point_model(["s0", "s1"], ["a"], "s0", {("s0", "a"): {"s1": 1.0}}, {("s0", "a"): 0.0, ("s1", "a"): 1.0})
    assert set(rules(m)) == {"reward-without-transition", "deadlock"}


def test_l1_radius_range():
    m = l1_model(["s"], ["a"], "s", {("s", "a"): ({"s": 1.0}, 2.5)}, {("s", "a"): 0.0})
    assert rules(m) == ["radius-out-of-range"]


def test_memdp_enabled_mismatch():
    env1 = {("s", "a"): {"s": 1.0}, ("s", "b"): {"s": 1.0}}
    env2 = {("s", "a"): {"s": 1.0}}
    m = memdp_model(["s"], ["a", "b"], "s", [env1, env2], {("s", "a"): 0.0, ("s", "b"): 0.0})
    assert "environment-enabled-mismatch" in rules(m)


def test_validate_is_idempotent(fig1):
    assert validate(fig1) == validate(fig1) == []


def test_enabled_actions(fig1):
    assert enabled_actions(fig1, "s0") == ["a", "b"]
    assert enabled_actions(fig1, "s1") == ["a"]
    with pytest.raises(KeyError):
        enabled_actions(fig1, "nowhere")


def test_model_is_read_only(fig1):
    with pytest.raises(TypeError):
        fig1.rows[(0, 0)] = None


def test_induce_dtmc_dirac_is_identity():
    m = two_state(0.25)
    d = induce_dtmc(m, StationaryPolicy.from_actions([0, 0], 1))
    assert np.array_equal(d.matrix, np.array([[0.25, 0.75], [0.0, 1.0]]))
    assert np.array_equal(d.rewards, np.array([1.0, 0.0]))


def mix_model():
    return point_model(
        ["s", "g", "x"],
        ["a", "b"],
        "s",
        {("s", "a"): {"g": 1.0}, ("s", "b"): {"x": 1.0}, ("g", "a"): {"g": 1.0}, ("x", "a"): {"x": 1.0}},
        {("s", "a"): 2.0, ("s", "b"): 0.0, ("g", "a"): 0.0, ("x", "a"): 0.0},
    )


def test_induce_dtmc_mixture():
    m = mix_model()
    pol = StationaryPolicy(np.array([[0.5, 0.5], [1.0, 0.0], [1.0, 0.0]]))
    d = induce_dtmc(m, pol)
    assert d.matrix[0].tolist() == [0.0, 0.5, 0.5]
    assert d.rewards[0] == pytest.approx(1.0)
    assert np.allclose(d.matrix.sum(axis=1), 1.0, atol=1e-9)


def test_induce_dtmc_rejects_uncertain_kinds(fig1):
    with pytest.raises(ModelError):
        induce_dtmc(fig1, StationaryPolicy.from_actions([0, 0, 0], 2))


def test_policy_checks():
    m = mix_model()
    with pytest.raises(ModelError, match="disabled"):
        check_policy(m, StationaryPolicy.from_actions([0, 1, 0], 2))
    with pytest.raises(ModelError, match="shape"):
        check_policy(m, StationaryPolicy.from_actions([0, 0], 2))
    with pytest.raises(ModelError, match="distribution"):
        check_policy(m, StationaryPolicy(np.array([[0.5, 0.4], [1, 0], [1, 0]])))


def test_policy_helpers():
    pol = StationaryPolicy.from_actions([1, 0], 2)
    assert pol.is_deterministic and pol.actions() == [1, 0]
    rnd = StationaryPolicy(np.array([[0.5, 0.5], [1.0, 0.0]]))
    assert not rnd.is_deterministic
    with pytest.raises(ValueError):
        rnd.action(0)
