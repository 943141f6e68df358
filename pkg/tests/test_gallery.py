import numpy as np
import pytest

from evlab.errors import PreconditionFailed
from evlab.gallery import (DEFAULT_GRAPH, OPERATOR_NAMES, Verdict, build, build_graph_laplacian,
                           build_nonlocal_laplacian, custom_operator, delay_left_vector,
                           nonlocal_principal_eigenvalue, parse_edges)
from evlab.lattice import RankOneFrame
from evlab.numerics import eigenpair_near

SMALL_N = {"graph": 20, "odd_order": 31, "delay": 32}


@pytest.mark.parametrize("name", OPERATOR_NAMES)
def test_every_operator_has_positive_principal_eigenvectors(name):
    op = build(name, SMALL_N.get(name, 80))
    pair = eigenpair_near(op.matrix, op.lambda0) if op.symbol is None else None
    if pair is not None:
        assert pair.value == pytest.approx(op.lambda0, abs=5e-2 * max(1.0, abs(op.lambda0)))
        assert np.all(pair.right_vector > 0)
        assert np.all(pair.left_vector > 0)
    assert op.frame.n == op.n
    assert op.m >= 1


@pytest.mark.parametrize("name", ["dirichlet", "neumann", "periodic", "nonlocal_symmetric", "graph"])
def test_symmetric_operators_are_weighted_symmetric(name):
    op = build(name, SMALL_N.get(name, 60))
    assert op.symmetric
    WA = op.frame.weights[:, None] * op.matrix
    np.testing.assert_allclose(WA, WA.T, atol=1e-9 * np.max(np.abs(WA)))


@pytest.mark.parametrize("name", ["neumann", "periodic", "graph", "odd_order", "delay"])
def test_constants_are_annihilated(name):
    op = build(name, SMALL_N.get(name, 60))
    scale = np.max(np.sum(np.abs(op.matrix), axis=1))
    assert np.max(np.abs(op.matrix @ np.ones(op.n))) <= 1e-10 * scale


def test_dirichlet_eigenvalue_converges_at_second_order():
    errs = [abs(eigenpair_near(build("dirichlet", n).matrix, -10).value + np.pi**2) for n in (25, 50, 100)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.9)


def test_thermostat_eigenvalue_converges_to_continuum_value():
    lam = nonlocal_principal_eigenvalue([[0.0, 0.2], [0.0, 0.0]], (0.0, np.pi))
    assert lam == pytest.approx(-0.07186, abs=1e-5)
    errs = [abs(eigenpair_near(build("thermostat", n).matrix, lam).value - lam) for n in (50, 100, 200)]
    assert errs[2] < errs[1] < errs[0]
    assert np.log2(errs[1] / errs[2]) > 1.7


def test_nonlocal_with_zero_coupling_is_neumann():
    a = build_nonlocal_laplacian(np.zeros((2, 2)), (0.0, 1.0), 40)
    b = build("neumann", 40)
    np.testing.assert_allclose(a.matrix, b.matrix)
    assert a.predicted.uniform_max == Verdict.UNTESTED


def test_predictions():
    assert build("dirichlet", 10).predicted.uniform_antimax == Verdict.FAILS
    assert build("thermostat", 10).predicted.uniform_antimax == Verdict.HOLDS
    assert build("neumann", 10).predicted.uniform_max == Verdict.UNTESTED


@pytest.mark.parametrize("beta", [0.0, -0.1, 0.5, 1 / np.pi])
def test_thermostat_rejects_beta_outside_range(beta):
    with pytest.raises(PreconditionFailed):
        build("thermostat", 20, beta=beta)


def test_builder_preconditions():
    with pytest.raises(PreconditionFailed):
        build("dirichlet", 2)
    with pytest.raises(PreconditionFailed):
        build("odd_order", 64)
    with pytest.raises(PreconditionFailed):
        build("odd_order", 7, ell=2)
    with pytest.raises(PreconditionFailed):
        build("delay", 15)
    with pytest.raises(PreconditionFailed):
        build("nope")
    with pytest.raises(PreconditionFailed):
        build("neumann", 20, beta=0.1)


def test_parse_edges_and_connectivity():
    assert parse_edges(DEFAULT_GRAPH) == [(0, 1, 1.0), (0, 2, 1.5), (0, 3, 2.0)]
    with pytest.raises(PreconditionFailed):
        parse_edges("0-1")
    with pytest.raises(PreconditionFailed):
        build_graph_laplacian("0-1:1,2-3:1", 10)
    with pytest.raises(PreconditionFailed):
        build_graph_laplacian("0-1:-1", 10)


def test_graph_node_count_and_total_length():
    op = build_graph_laplacian(DEFAULT_GRAPH, 10)
    assert op.n == 4 + (10 - 1) + (15 - 1) + (20 - 1)
    assert op.frame.weights.sum() == pytest.approx(4.5)


def test_delay_left_vector_is_discrete_eigenvector():
    errs = []
    for n in (32, 64, 128):
        op = build("delay", n)
        psi = delay_left_vector(op)
        errs.append(np.max(np.abs(psi @ op.matrix)) / np.max(np.abs(psi)))
    assert errs[2] < errs[1] < errs[0]


def test_rebuild_round_trip():
    op = build("graph", 10)
    assert op.rebuild(20).n > op.n
    assert build("thermostat", 30, beta=0.1).rebuild(40).params == {"beta": 0.1}


def test_custom_operator_detects_symmetry():
    frame = RankOneFrame.constant(np.ones(3))
    A = np.array([[-1.0, 1.0, 0.0], [1.0, -2.0, 1.0], [0.0, 1.0, -1.0]])
    op = custom_operator(A, frame, 0.0)
    assert op.symmetric
    with pytest.raises(PreconditionFailed):
        custom_operator(np.eye(2), frame, 0.0)
