import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evlab.errors import DirectionViolated, NotPositiveDefinite, NotSymmetric, PreconditionFailed
from evlab.gallery import build
from evlab.principles import (check_antimax_characterization, check_form_domain_estimate,
                              check_group_not_eventually_positive, check_one_sided_extension,
                              check_powers_theorem, check_projection_convergence, check_resolvent_expansion,
                              check_two_sided_extension, cyclicity_check, expansion_residual,
                              resolvent_identity_residual)
from evlab.principles.theorems import (EXPLORATORY, SINGLE_MESH, default_bump, eventually_decreasing,
                                       form_domain_bound, is_perfect_odd_power, power_lower_bound)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**31 - 1), st.integers(1, 6))
def test_expansion_identity_on_random_matrices(n, seed, order):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n)) - 3 * n * np.eye(n)
    mu, mu0 = rng.uniform(-1, 1, 2)
    assert expansion_residual(A, mu, mu0, order) <= 1e-10
    assert resolvent_identity_residual(A, mu, mu0) <= 1e-10


def test_resolvent_expansion_check_on_thermostat():
    rep = check_resolvent_expansion(build("thermostat", 60), seed=3)
    assert rep.ok and rep.details["max_residual"] <= 1e-8
    assert len(rep.details["rows"]) == 9


def test_two_sided_extension_bounds_powers():
    op = build("neumann", 40)
    rep = check_two_sided_extension(op, -2.0, [-3.0, -1.0, -0.5, 1.0], n_max_power=3)
    assert rep.ok and rep.label == SINGLE_MESH
    assert rep.details["max_ratio"] <= 1.0


def test_one_sided_extension_directions():
    op = build("neumann", 40)
    rep = check_one_sided_extension(op, -1.0, "left_lower", [-2.0, -1.5, -1.0])
    assert rep.ok and rep.label == SINGLE_MESH
    with pytest.raises(DirectionViolated):
        check_one_sided_extension(op, -1.0, "left_lower", [-2.0, -0.5])
    explo = check_one_sided_extension(op, -1.0, "left_lower", [-2.0, -0.5], exploratory=True)
    assert explo.label == EXPLORATORY
    assert check_one_sided_extension(op, 1.0, "right_upper", [1.0, 2.0, 4.0]).ok
    assert check_one_sided_extension(op, -1.0, "any_lower", [-2.0, 0.5, 2.0]).ok
    assert check_one_sided_extension(op, -1.0, "left_lower", []).details["vacuous"]
    with pytest.raises(ValueError):
        check_one_sided_extension(op, -1.0, "sideways", [-2.0])


def test_side_free_direction_is_exploratory_for_delay():
    op = build("delay", 32)
    rep = check_one_sided_extension(op, -1.0, "any_lower", [-2.0, 1.0])
    assert rep.ok and rep.label == EXPLORATORY and not rep.details["asserted"]


@pytest.mark.parametrize("mu_shift", [0.5, -0.5, -5.0])
def test_power_lower_bound_is_nonnegative(mu_shift):
    for n in (1, 2, 3):
        assert power_lower_bound(0.3, mu_shift, n, 2.0, 1.5) >= 0


def test_eventually_decreasing():
    assert eventually_decreasing([3, 2, 1])
    assert eventually_decreasing([1, 5, 4, 3, 2, 1])
    assert not eventually_decreasing([1, 2, 3, 4])


@pytest.mark.parametrize("name,n", [("neumann", 60), ("delay", 32)])
@pytest.mark.parametrize("side", [1, -1])
def test_projection_convergence(name, n, side):
    rep = check_projection_convergence(build(name, n), side=side)
    assert rep.ok, rep.details
    assert rep.details["final_over_initial"] < 1e-2


@pytest.mark.parametrize("name", ["neumann", "thermostat", "graph", "delay"])
def test_powers_theorem_windows(name):
    rep = check_powers_theorem(build(name, {"graph": 15, "delay": 32}.get(name, 60)))
    assert rep.ok
    assert rep.details["right_width"] > 0 and rep.details["left_width"] > 0


def test_characterization_agrees_on_neumann_and_dirichlet():
    neu = check_antimax_characterization(build("neumann", 20), 1.0, n_list=(20, 40, 80, 160))
    assert neu.ok and neu.details["verdicts"] == {"i": True, "ii": True, "iii": True}
    dir_ = check_antimax_characterization(build("dirichlet", 20), 0.0, n_list=(20, 40, 80, 160))
    assert dir_.ok and dir_.details["verdicts"] == {"i": False, "ii": False, "iii": False}


def test_characterization_requires_mu1_right_of_lambda0():
    with pytest.raises(PreconditionFailed):
        check_antimax_characterization(build("neumann", 20), -1.0, n_list=(20, 40))


def test_cyclicity_arithmetic():
    assert cyclicity_check(0) is None
    assert cyclicity_check(1) is False
    assert cyclicity_check(2) is False
    assert is_perfect_odd_power(8, 3) and is_perfect_odd_power(-32, 5)
    assert not is_perfect_odd_power(2, 3)


def test_default_bump_is_nonnegative_and_seeded():
    a, b = default_bump(31, seed=1), default_bump(31, seed=1)
    assert np.array_equal(a, b) and np.all(a >= 0) and a.max() > 0
    assert not np.array_equal(a, default_bump(31, seed=2))


def test_group_positivity_witness_and_exhaustion():
    first = check_group_not_eventually_positive(0, n=63)
    assert first.ok and first.details["exhausted"] and first.details["cyclic"] is None
    third = check_group_not_eventually_positive(1, n=63)
    assert third.ok and third.details["witness_t"] is not None and third.details["cyclic"] is False
    with pytest.raises(PreconditionFailed):
        check_group_not_eventually_positive(1, n=7, f=-np.ones(7))


def test_form_domain_estimate():
    op = build("neumann", 40)
    observed, bound = form_domain_bound(op, 1.0)
    assert observed <= bound * (1 + 1e-9)
    assert check_form_domain_estimate(op, 1.0, n_list=(40, 80)).ok
    with pytest.raises(NotPositiveDefinite):
        form_domain_bound(op, -1.0)
    with pytest.raises((NotSymmetric, PreconditionFailed)):
        form_domain_bound(build("delay", 32), 1.0)
