import numpy as np
import pytest

from contractlab.piecewise import (
    PiecewiseLinearFn,
    clip_above,
    concave_closure,
    from_breakpoints,
    pl_eval,
    pl_inverse,
    pl_min,
    pl_subgradient,
    simplify_concave,
)


def test_eval_interpolates():
    fn = PiecewiseLinearFn((0.0, 1.0), (0.0, 1.0))
    assert pl_eval(fn, 0.5) == pytest.approx(0.5)
    assert pl_eval(fn, 0.0) == 0.0
    with pytest.raises(ValueError):
        pl_eval(fn, 1.5)


def test_inverse_leftmost_on_flat():
    fn = PiecewiseLinearFn((0.0, 0.5, 1.0), (0.0, 0.5, 0.5))
    assert pl_inverse(fn, 0.5) == pytest.approx(0.5)
    assert pl_inverse(fn, 0.25) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        pl_inverse(fn, 0.75)


def test_subgradient_interval_at_kink():
    fn = PiecewiseLinearFn((0.0, 0.5, 1.0), (0.0, 0.5, 0.5))
    assert pl_subgradient(fn, 0.5) == pytest.approx((0.0, 1.0))
    assert pl_subgradient(fn, 0.25) == pytest.approx((1.0, 1.0))
    assert pl_subgradient(fn, 0.0) == pytest.approx((1.0, 1.0))


def test_inverse_of_eval_is_identity_on_strictly_increasing():
    fn = PiecewiseLinearFn((0.0, 0.3, 0.7, 1.0), (0.0, 0.2, 0.8, 1.0))
    for x in np.linspace(0.0, 1.0, 101):
        assert pl_inverse(fn, fn.eval(x)) == pytest.approx(float(x), abs=1e-12)


def test_strictly_increasing_required():
    with pytest.raises(ValueError):
        PiecewiseLinearFn((0.0, 0.0, 1.0), (0.0, 0.5, 1.0))
    with pytest.raises(ValueError):
        PiecewiseLinearFn((0.0,), (0.0,))


def test_concave_closure_identity_on_concave_points():
    # The table instance's F(1|.) points are already concave.
    pts = [(0.0, 0.0), (0.2, 0.2), (0.4, 0.35), (0.6, 0.45), (0.8, 0.5)]
    hull = concave_closure(pts)
    assert hull.breakpoints() == pts


def test_concave_closure_drops_point_below_chord():
    hull = concave_closure([(0.0, 0.0), (0.5, 0.1), (1.0, 0.5)])
    assert hull.breakpoints() == [(0.0, 0.0), (1.0, 0.5)]


def test_concave_closure_two_points_is_segment():
    hull = concave_closure([(0.0, 0.1), (1.0, 0.4)])
    assert hull.breakpoints() == [(0.0, 0.1), (1.0, 0.4)]
    with pytest.raises(ValueError):
        concave_closure([(0.0, 0.0)])


def test_concave_closure_dominates_inputs(rng):
    for _ in range(50):
        n = int(rng.integers(3, 12))
        xs = np.sort(rng.uniform(0, 1, n))
        xs += np.arange(n) * 1e-6  # force distinct
        ys = rng.uniform(0, 1, n)
        hull = concave_closure(list(zip(xs, ys)))
        assert hull.is_concave()
        assert np.all(hull.eval(xs) >= ys - 1e-9)


def test_pl_min_exact_at_crossings():
    f = PiecewiseLinearFn((0.0, 1.0), (0.0, 1.0))
    g = PiecewiseLinearFn((0.0, 1.0), (1.0, 0.0))
    h = pl_min(f, g)
    assert h.eval(0.5) == pytest.approx(0.5)
    assert h.eval(0.25) == pytest.approx(0.25)
    assert h.eval(0.75) == pytest.approx(0.25)
    assert 0.5 in h.xs


def test_clip_above_preserves_concavity():
    fn = PiecewiseLinearFn((0.0, 0.5, 1.0), (0.0, 0.9, 1.3))
    capped = clip_above(fn, 1.0)
    assert capped.eval(1.0) == pytest.approx(1.0)
    assert capped.eval(0.5) == pytest.approx(0.9)
    assert capped.is_concave()


def test_simplify_concave_band_and_shape(rng):
    for _ in range(25):
        n = int(rng.integers(4, 40))
        xs = np.concatenate([[0.0], np.sort(rng.uniform(0.01, 0.99, n)), [1.0]])
        slopes = np.sort(rng.uniform(0.1, 3.0, len(xs) - 1))[::-1]
        ys = np.concatenate([[0.0], np.cumsum(slopes * np.diff(xs))])
        fn = PiecewiseLinearFn(tuple(xs), tuple(ys))
        tol = 0.05
        simple = simplify_concave(fn, tol)
        assert simple.is_concave()
        assert simple.is_nondecreasing()
        assert len(simple.xs) <= len(fn.xs)
        grid = np.linspace(0, 1, 257)
        diff = simple.eval(grid) - fn.eval(grid)
        assert np.all(diff >= -1e-9)
        assert np.all(diff <= tol + 1e-9)


def test_from_breakpoints_drops_duplicates():
    fn = from_breakpoints([(0.0, 0.0), (0.0, 0.1), (1.0, 1.0)])
    assert fn.xs == (0.0, 1.0)
