import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sumoss.errors import DegenerateInputError
from sumoss.gp import (
    KernelModel,
    Position,
    build_cov,
    conditional_variance,
    delta_gain,
    kernel_cov,
    mi_exact,
)


def joint_precision_variance(pts, y, cond, model):
    """Conditional variance as 1 / (inverse joint covariance)[y, y]: a route independent of the Schur formula."""
    idx = [y] + list(cond)
    full = build_cov(pts[idx], model).entries
    return 1.0 / np.linalg.inv(full)[0, 0]


def test_kernel_zero_distance_is_one():
    for phi in (0.3, 1.0, 7.0):
        assert kernel_cov((1.2, -3.4), (1.2, -3.4), KernelModel(phi=phi)) == 1.0


def test_kernel_at_one_bandwidth():
    assert kernel_cov((0, 0), (1.5, 0), KernelModel(phi=1.5)) == pytest.approx(math.exp(-0.5), abs=1e-15)
    assert kernel_cov((0, 0), (0.6, 0.8), KernelModel(phi=1.0)) == pytest.approx(0.6065306597126334, abs=1e-15)


def test_kernel_far_apart_vanishes():
    assert kernel_cov((0, 0), (15.0, 0), KernelModel(phi=1.5)) <= math.exp(-50)


def test_kernel_strictly_decreasing():
    m = KernelModel(phi=1.0)
    vals = [kernel_cov((0, 0), (r, 0), m) for r in np.linspace(0, 4, 30)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_kernel_rejects_non_finite():
    with pytest.raises(ValueError):
        kernel_cov((0, math.nan), (0, 0), KernelModel())
    with pytest.raises(ValueError):
        Position(math.inf, 0.0)


def test_kernel_model_validation():
    with pytest.raises(ValueError):
        KernelModel(phi=0)
    with pytest.raises(ValueError):
        KernelModel(jitter=-1e-3)
    assert KernelModel(jitter=1e-4).prior_variance == 1.0 + 1e-4


def test_build_cov_single():
    cov = build_cov([Position(1, 1)], KernelModel(jitter=0.25))
    assert cov.entries.tolist() == [[1.25]]


def test_build_cov_duplicates_need_jitter():
    with pytest.raises(DegenerateInputError):
        build_cov([(0, 0), (0, 0)], KernelModel(jitter=0.0))
    cov = build_cov([(0, 0), (0, 0)], KernelModel(jitter=1e-6))
    assert np.linalg.eigvalsh(cov.entries).min() > 0


def test_build_cov_collinear():
    cov = build_cov([(0, 0), (2, 0), (4, 0)], KernelModel(phi=2.0, jitter=0.0)).entries
    assert cov[0, 1] == pytest.approx(math.exp(-0.5))
    assert cov[1, 2] == pytest.approx(math.exp(-0.5))
    assert cov[0, 2] == pytest.approx(math.exp(-2.0))
    assert np.array_equal(cov, cov.T)
    assert np.all(np.diag(cov) == 1.0)


def test_conditional_variance_empty():
    m = KernelModel(jitter=1e-3)
    assert conditional_variance((0, 0), [], m) == m.prior_variance


def test_conditional_variance_self_conditioning():
    m = KernelModel(jitter=1e-6)
    v = conditional_variance((1, 1), [(1, 1)], m)
    # 1 + j - 1 / (1 + j) ~ 2j
    assert 0 < v < 1e-5


def test_conditional_variance_matches_precision_oracle(rng):
    for _ in range(20):
        m = KernelModel(phi=float(rng.uniform(0.5, 3)))
        pts = rng.uniform(0, 5, (5, 2))
        v = conditional_variance(pts[0], pts[1:], m)
        assert v == pytest.approx(joint_precision_variance(pts, 0, [1, 2, 3, 4], m), rel=1e-7, abs=1e-12)
        full = build_cov(pts, m).entries
        schur = full[0, 0] - full[0, 1:] @ np.linalg.inv(full[1:, 1:]) @ full[1:, 0]
        assert v == pytest.approx(schur, rel=1e-7, abs=1e-12)
        assert 0 < v <= m.prior_variance


def test_conditional_variance_singular_conditioning():
    with pytest.raises(DegenerateInputError):
        conditional_variance((0, 0), [(1, 1), (1, 1)], KernelModel(jitter=0.0))


def test_delta_gain_empty_sets_is_zero():
    assert delta_gain((0, 0), [], [], KernelModel()) == 0.0


def test_delta_gain_symmetric_configuration():
    assert delta_gain((0, 0), [(1, 0)], [(-1, 0)], KernelModel(phi=1.2)) == pytest.approx(0.0, abs=1e-15)
    assert delta_gain((0, 0), [(0, 2)], [(2, 0)], KernelModel(phi=0.7)) == pytest.approx(0.0, abs=1e-15)


def test_delta_gain_matches_mi_on_six_points(rng):
    m = KernelModel(phi=1.3)
    pts = rng.uniform(0, 5, (6, 2))
    A, y = [0, 3], 5
    others = [1, 2, 4]
    oracle = mi_exact(A + [y], pts, m) - mi_exact(A, pts, m)
    assert delta_gain(pts[y], pts[A], pts[others], m) == pytest.approx(oracle, abs=1e-8)


def test_delta_gain_underflow_signalled():
    with pytest.raises(DegenerateInputError):
        delta_gain((0, 0), [(0, 0)], [(3, 3)], KernelModel(jitter=0.0))


def test_mi_independent_sensors():
    pts = np.array([(0, 0), (40, 0), (0, 40), (40, 40)], float)
    assert mi_exact([0, 3], pts, KernelModel(phi=1.5)) == pytest.approx(0.0, abs=1e-6)


def test_mi_single_sensor_closed_form(rng):
    m = KernelModel(phi=1.8)
    pts = rng.uniform(0, 5, (7, 2))
    want = 0.5 * math.log(m.prior_variance / joint_precision_variance(pts, 2, [0, 1, 3, 4, 5, 6], m))
    assert mi_exact([2], pts, m) == pytest.approx(want, abs=1e-8)


def test_mi_edge_cases_and_validation():
    pts = np.array([(0, 0), (1, 0), (2, 0)], float)
    m = KernelModel()
    assert mi_exact([], pts, m) == 0.0
    assert mi_exact([0, 1, 2], pts, m) == 0.0
    with pytest.raises(ValueError):
        mi_exact([0, 0], pts, m)
    with pytest.raises(ValueError):
        mi_exact([5], pts, m)


def test_gain_chain_telescopes(rng):
    m = KernelModel(phi=1.5)
    pts = rng.uniform(0, 5, (9, 2))
    order = [4, 0, 7, 2]
    total = 0.0
    for i, y in enumerate(order):
        A = order[:i]
        others = [j for j in range(9) if j not in A and j != y]
        total += delta_gain(pts[y], pts[A], pts[others], m)
    assert total == pytest.approx(mi_exact(order, pts, m), abs=1e-8)


# -- properties ---------------------------------------------------------------

coords = st.floats(0.0, 5.0, allow_nan=False)
point_sets = st.lists(st.tuples(coords, coords), min_size=2, max_size=10, unique=True)
phis = st.floats(0.5, 3.0)


@settings(max_examples=60, deadline=None)
@given(point_sets, phis, st.sampled_from([0.0, 1e-9, 1e-3]))
def test_cov_is_psd(points, phi, jitter):
    pts = np.array(points)
    d = np.sum((pts[:, None] - pts[None]) ** 2, axis=-1) + np.eye(len(pts))
    if jitter == 0 and d.min() < 1e-12:
        return
    m = KernelModel(phi=phi, jitter=jitter)
    cov = build_cov(pts, m).entries
    assert np.max(np.abs(cov - cov.T)) <= 1e-12
    assert np.linalg.eigvalsh(cov).min() >= jitter - 1e-9
    assert np.allclose(np.diag(cov), m.prior_variance)


@settings(max_examples=60, deadline=None)
@given(point_sets, phis, st.data())
def test_conditioning_never_increases_variance(points, phi, data):
    pts = np.array(points)
    m = KernelModel(phi=phi)
    n = len(pts)
    big = data.draw(st.lists(st.integers(1, n - 1), unique=True))
    small = data.draw(st.lists(st.sampled_from(big), unique=True)) if big else []
    assert conditional_variance(pts[0], pts[big], m) <= conditional_variance(pts[0], pts[small], m) + 1e-10


@settings(max_examples=40, deadline=None)
@given(point_sets, phis, st.floats(-100, 100))
def test_prior_mean_is_irrelevant(points, phi, mean):
    pts = np.array(points)
    a, b = KernelModel(phi=phi), KernelModel(phi=phi, prior_mean=mean)
    n = len(pts)
    A, others = list(range(1, n // 2 + 1)), list(range(n // 2 + 1, n))
    assert kernel_cov(pts[0], pts[1], a) == kernel_cov(pts[0], pts[1], b)
    assert conditional_variance(pts[0], pts[1:], a) == conditional_variance(pts[0], pts[1:], b)
    assert delta_gain(pts[0], pts[A], pts[others], a) == delta_gain(pts[0], pts[A], pts[others], b)
    assert mi_exact([0], pts, a) == mi_exact([0], pts, b)


def test_oracle_equivalence_100_instances(rng):
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(3, 11))
        m = KernelModel(phi=float(rng.uniform(0.5, 3)))
        pts = rng.uniform(0, 5, (n, 2))
        perm = rng.permutation(n)
        k = int(rng.integers(0, n - 1))
        A, y = list(perm[:k]), int(perm[k])
        others = list(perm[k + 1 :])
        oracle = mi_exact(A + [y], pts, m) - mi_exact(A, pts, m)
        worst = max(worst, abs(delta_gain(pts[y], pts[A], pts[others], m) - oracle))
    assert worst <= 1e-8


def test_submodular_below_half(rng):
    checked = 0
    for _ in range(200):
        n = int(rng.integers(7, 13))
        m = KernelModel(phi=float(rng.uniform(0.5, 3)))
        pts = rng.uniform(0, 5, (n, 2))
        perm = list(rng.permutation(n))
        size_b = int(rng.integers(2, (n - 1) // 2 + 1))
        if size_b >= n / 2:
            continue
        B = perm[:size_b]
        A = B[: int(rng.integers(1, size_b))]
        y = perm[size_b]
        gain = lambda S: delta_gain(pts[y], pts[S], pts[[i for i in range(n) if i not in S and i != y]], m)
        assert gain(A) >= gain(B) - 1e-9
        checked += 1
    assert checked > 100
