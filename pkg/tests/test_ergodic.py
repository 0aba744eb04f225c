import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monoprox import operators as ops
from monoprox.ergodic import ErgodicAccumulator, ergodic_recompute
from monoprox.solver import HpeParams, PerturbedOracle, Schedule, rhpe_solve


def two_step():
    acc = ErgodicAccumulator(1)
    acc.update(1.0, 1.0, [0.5], [0.5], 0.0)
    acc.update(1.0, 1.0, [0.25], [0.25], 0.0)
    return acc


def test_single_update_sums():
    acc = ErgodicAccumulator(1).update(1.0, 1.0, [0.5], [0.5], 0.0)
    assert (acc.Lambda, acc.Sz[0], acc.Sv[0], acc.Se, acc.Szv) == (1.0, 0.5, 0.5, 0.0, 0.25)


def test_two_updates_sums():
    acc = two_step()
    assert (acc.Lambda, acc.Sz[0], acc.Sv[0], acc.Szv) == (2.0, 0.75, 0.75, 0.3125)


def test_weights_are_products():
    a = ErgodicAccumulator(2).update(0.5, 2.0, [1, 2], [3, 4], 0.1)
    b = ErgodicAccumulator(2).update(1.0, 1.0, [1, 2], [3, 4], 0.1)
    assert a.Lambda == b.Lambda and a.Szv == b.Szv
    np.testing.assert_array_equal(a.Sz, b.Sz)


def test_two_step_finalize_exact():
    snap = two_step().finalize()
    assert snap.Lambda == 2.0
    assert snap.z_tilde_a[0] == 0.375 and snap.v_a[0] == 0.375
    assert snap.eps_a == 0.015625


def test_two_step_recompute_agrees():
    recs = [(1.0, 1.0, [0.5], [0.5], 0.0), (1.0, 1.0, [0.25], [0.25], 0.0)]
    snap = ergodic_recompute(recs)
    assert snap.eps_a == pytest.approx(0.015625, abs=1e-15)
    assert abs(snap.eps_a - two_step().finalize().eps_a) <= 1e-12


def test_single_update_eps_is_exact():
    snap = ErgodicAccumulator(3).update(0.3, 2.0, [1, 2, 3], [-1, 0, 5], 0.7).finalize()
    assert snap.eps_a == pytest.approx(0.7, abs=1e-14)
    rec = ergodic_recompute([(0.3, 2.0, [1, 2, 3], [-1, 0, 5], 0.7)])
    assert rec.Lambda == pytest.approx(0.6) and rec.eps_a == 0.7


def test_constant_points_give_weighted_eps():
    acc = ErgodicAccumulator(2)
    data = [(1.0, 2.0, 0.1), (0.5, 1.0, 0.4), (0.2, 5.0, 0.0)]
    for t, lam, e in data:
        acc.update(t, lam, [1.0, -1.0], [2.0, 0.5], e)
    expected = sum(t * lam * e for t, lam, e in data) / sum(t * lam for t, lam, _ in data)
    assert acc.finalize().eps_a == pytest.approx(expected, rel=1e-12)


def test_finalize_requires_updates():
    with pytest.raises(ValueError):
        ErgodicAccumulator(2).finalize()


def test_update_validates_inputs():
    acc = ErgodicAccumulator(2)
    with pytest.raises(ValueError):
        acc.update(1.5, 1.0, [0, 0], [0, 0], 0.0)
    with pytest.raises(ValueError):
        acc.update(1.0, 1.0, [0, 0, 0], [0, 0], 0.0)


def test_negative_flag():
    acc = ErgodicAccumulator(1)
    acc.update(1.0, 1.0, [0.0], [1.0], 0.0).update(1.0, 1.0, [1.0], [0.0], 0.0)
    # a decreasing pair, impossible for a monotone operator
    snap = acc.finalize()
    assert snap.eps_a == pytest.approx(-0.25) and snap.negative_flag


streams = st.lists(
    st.tuples(st.floats(0.01, 1.0), st.floats(1e-3, 1e3),
              st.lists(st.floats(-10, 10), min_size=3, max_size=3),
              st.lists(st.floats(-10, 10), min_size=3, max_size=3),
              st.floats(0, 5)),
    min_size=1, max_size=100,
)


@settings(max_examples=200, deadline=None)
@given(streams)
def test_incremental_matches_recompute(records):
    acc = ErgodicAccumulator(3)
    for r in records:
        acc.update(*r)
    a, b = acc.finalize(), ergodic_recompute(records)
    assert a.Lambda == pytest.approx(b.Lambda, rel=1e-12)
    np.testing.assert_allclose(a.z_tilde_a, b.z_tilde_a, rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(a.v_a, b.v_a, rtol=1e-9, atol=1e-9)
    scale = 1 + abs(b.szv) / b.Lambda
    assert abs(a.eps_a - b.eps_a) <= 1e-9 * scale


@settings(max_examples=100, deadline=None)
@given(streams)
def test_averages_in_convex_hull(records):
    acc = ErgodicAccumulator(3)
    prev = 0.0
    for r in records:
        acc.update(*r)
        assert acc.Lambda > prev
        prev = acc.Lambda
    snap = acc.finalize()
    Z = np.array([r[2] for r in records])
    V = np.array([r[3] for r in records])
    assert np.all(snap.z_tilde_a >= Z.min(axis=0) - 1e-9) and np.all(snap.z_tilde_a <= Z.max(axis=0) + 1e-9)
    assert np.all(snap.v_a >= V.min(axis=0) - 1e-9) and np.all(snap.v_a <= V.max(axis=0) + 1e-9)


def test_telescoping_identity_on_run():
    traj = rhpe_solve(ops.random_spd(5, 0.1, 2.0, 6), PerturbedOracle(Schedule((0.7,)), 0.5),
                      HpeParams(sigma=0.4, tau=0.3, relaxation=0.3, max_iters=50, seed=2),
                      np.arange(5.0))
    for rec, snap in zip(traj.records, traj.snapshots):
        lhs = traj.z0 - rec.z_next
        np.testing.assert_allclose(lhs, snap.Lambda * snap.v_a, rtol=1e-9, atol=1e-12)
        assert not snap.negative_flag
