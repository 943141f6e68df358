import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evlab.errors import MuInSpectrum
from evlab.gallery import build, custom_operator
from evlab.lattice import MarginReport, RankOneFrame
from evlab.principles import (DIVERGENT, INCONCLUSIVE, MIXED, SKIPPED, STRONG_NEGATIVE, STRONG_POSITIVE,
                              UNIFORM, MeshRecord, MuRecord, Thresholds, build_spectral_data, classify,
                              probe_window, refinement_study, scan, windows)
from evlab.principles.scan import geometric_offsets, refinement_verdict


def report(lo, hi):
    return MarginReport(lo, hi, max(abs(lo), abs(hi)), (0, 0), (0, 0))


def test_classify_uses_relative_threshold():
    assert classify(report(0.5, 2.0)) == STRONG_POSITIVE
    assert classify(report(-2.0, -0.5)) == STRONG_NEGATIVE
    assert classify(report(-1.0, 1.0)) == MIXED
    # margins within eps_cls * c_hat of zero are never strong
    assert classify(report(1e-12, 1.0)) == MIXED
    assert classify(report(1e-12, 1.0), Thresholds(eps_cls=0.0)) == STRONG_POSITIVE


def test_windows_take_leading_runs_and_skip_transparently():
    recs = [MuRecord(mu, cls) for mu, cls in [
        (-3.0, STRONG_NEGATIVE), (-2.0, MIXED), (-1.0, STRONG_NEGATIVE), (-0.5, SKIPPED), (-0.1, STRONG_NEGATIVE),
        (0.1, STRONG_POSITIVE), (0.2, STRONG_POSITIVE), (0.3, MIXED), (0.4, STRONG_POSITIVE)]]
    right, left = windows(recs, 0.0)
    assert right == (0.1, 0.2)
    assert left == (-0.1, -1.0)


def test_spectral_data_projection_is_idempotent():
    op = build("thermostat", 60)
    sd = build_spectral_data(op)
    P = sd.projection
    np.testing.assert_allclose(P @ P, P, atol=1e-10 * np.max(np.abs(P)))
    np.testing.assert_allclose(op.matrix @ P, sd.lambda0 * P, atol=1e-6 * np.max(np.abs(op.matrix)) * np.max(P))
    assert sd.simple and sd.gap > 0


def test_neumann_scan_is_strong_negative_left_of_zero():
    rep = scan(build("neumann", 60), -0.5, -0.01, 20)
    assert rep.count(STRONG_NEGATIVE) == 20
    assert rep.left_window == (-0.01, -0.5)
    assert rep.left_width == pytest.approx(0.5)
    assert rep.right_window is None


def test_scan_skips_other_eigenvalues():
    op = build("neumann", 40)
    # second Neumann eigenvalue is about -pi^2; a grid point right on it must be skipped
    lam1 = np.sort(np.linalg.eigvals(op.matrix).real)[-2]
    rep = scan(op, lam1 - 1.0, lam1 + 1.0, 21)
    assert rep.records[10].classification == SKIPPED


def test_scan_validates_arguments():
    op = build("neumann", 20)
    with pytest.raises(ValueError):
        scan(op, 1.0, -1.0, 10)
    with pytest.raises(ValueError):
        scan(op, -1.0, 1.0, 1)


def test_odd_order_scan_has_windows_on_both_sides():
    rep = scan(build("odd_order", 63, ell=1), -1.0, 1.0, 20)
    assert rep.right_window is not None and rep.left_window is not None


def test_probe_window_stops_at_first_failure():
    op = build("neumann", 40)
    width, recs = probe_window(op, -1, lambda T: np.max(T) < 0, reach=1.0)
    assert width == pytest.approx(1.0)
    assert all(ok for _, ok in recs)
    width, recs = probe_window(op, -1, lambda T: False, reach=1.0)
    assert width == 0.0 and len(recs) == 1


def test_geometric_offsets():
    off = geometric_offsets(2.0, 9)
    assert off[-1] == 2.0 and off[0] == pytest.approx(2.0 * 2 ** -2)
    assert np.all(np.diff(off) > 0)


def mesh(c, lo=1.0, hi=None):
    return MeshRecord(0, 0, lo, c if hi is None else hi, c)


def test_refinement_verdict_rules():
    assert refinement_verdict([mesh(1), mesh(2), mesh(4), mesh(8)], "c_hat")[0] == DIVERGENT
    assert refinement_verdict([mesh(1), mesh(1.1), mesh(1.05), mesh(1.0)], "c_hat")[0] == UNIFORM
    assert refinement_verdict([mesh(1), mesh(1.1), mesh(1.05)], "c_hat")[0] == INCONCLUSIVE  # too few meshes
    assert refinement_verdict([mesh(1), mesh(1.5), mesh(1.6), mesh(3)], "c_hat")[0] == INCONCLUSIVE
    # sign change of the tracked margin
    flipped = [mesh(1, 1.0), mesh(1, 0.9), mesh(1, -0.9), mesh(1, 1.0)]
    assert refinement_verdict(flipped, "lower_margin")[0] == INCONCLUSIVE


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.9, 1.1), min_size=4, max_size=6))
def test_stable_sequences_are_uniform(values):
    meshes = [mesh(v) for v in values]
    verdict, ratios, _ = refinement_verdict(meshes, "c_hat")
    assert (verdict == UNIFORM) == all(0.8 <= r <= 1.25 for r in ratios)


def test_refinement_study_on_neumann_and_dirichlet():
    s = refinement_study("neumann", {}, -0.25, [20, 40, 80, 160])
    assert s.verdict == UNIFORM and s.tracked == "upper_margin"
    d = refinement_study("dirichlet", {}, 0.0, [20, 40, 80, 160])
    assert d.verdict == DIVERGENT
    assert all(g >= 1.4 for g in d.growth)


def test_refinement_study_rejects_spectral_probe():
    with pytest.raises(MuInSpectrum):
        refinement_study("neumann", {}, 0.0, [10, 20])


def test_custom_operator_runs_through_scan():
    A = np.array([[-1.0, 1.0], [1.0, -1.0]])
    op = custom_operator(A, RankOneFrame.constant(np.ones(2)), 0.0)
    rep = scan(op, -1.5, 1.5, 7)
    assert rep.right_window is not None and rep.left_window is not None
