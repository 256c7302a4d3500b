"""Dense path evaluation, segment views, sup-norms, CSV export."""
from __future__ import annotations

import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpsfde.errors import OutOfDomain, PathExploded
from hpsfde.paths import (ConstantSegment, DensePath, FunctionSegment,
                          eval as path_eval, segment, sup_norm, write_csv)


def make_path(times, values, theta_lower=0.5, t0=1.0, regimes=None,
              exploded_at=None):
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if regimes is None:
        regimes = np.ones(len(times), dtype=np.int64)
    return DensePath(times=times, values=values, regimes=np.asarray(regimes),
                     theta_lower=theta_lower, t0=t0, exploded_at=exploded_at)


SIMPLE = make_path([0.5, 0.75, 1.0, 1.5, 2.0], [0.0, 1.0, 2.0, 1.0, 3.0])


def test_eval_exact_at_grid_points():
    for t, want in zip(SIMPLE.times, SIMPLE.values[:, 0]):
        assert path_eval(SIMPLE, t)[0] == want


def test_eval_linear_between_grid_points():
    assert path_eval(SIMPLE, 1.25)[0] == pytest.approx(1.5, abs=1e-15)
    assert path_eval(SIMPLE, 0.625)[0] == pytest.approx(0.5, abs=1e-15)


def test_eval_vectorized_shape():
    out = path_eval(SIMPLE, np.array([0.5, 1.0, 2.0]))
    assert out.shape == (3, 1)
    assert np.array_equal(out[:, 0], [0.0, 2.0, 3.0])
    grid = np.array([[0.5, 1.0], [1.5, 2.0]])
    assert path_eval(SIMPLE, grid).shape == (2, 2, 1)


def test_eval_out_of_domain():
    with pytest.raises(OutOfDomain):
        path_eval(SIMPLE, 0.4)
    with pytest.raises(OutOfDomain):
        path_eval(SIMPLE, 2.1)


def test_eval_tolerates_roundoff_at_endpoints():
    assert path_eval(SIMPLE, 2.0 + 1e-12)[0] == 3.0
    assert path_eval(SIMPLE, 0.5 - 1e-12)[0] == 0.0


def test_exploded_path_guards_evaluation():
    p = make_path([0.5, 1.0, 1.5], [0.0, 1.0, 5.0], exploded_at=1.5)
    assert path_eval(p, 1.5)[0] == 5.0
    with pytest.raises(PathExploded):
        path_eval(p, 1.5 + 1e-6)
    with pytest.raises(PathExploded):
        segment(p, 1.6)


def test_segment_anchor_domain():
    with pytest.raises(OutOfDomain):
        segment(SIMPLE, 0.9)  # before t0
    with pytest.raises(OutOfDomain):
        segment(SIMPLE, 2.5)  # past horizon
    view = segment(SIMPLE, 2.0)
    assert view.point[0] == 3.0


def test_segment_view_values():
    view = segment(SIMPLE, 2.0)
    # theta=0.5 -> x(1.0) = 2, theta=1 -> x(2) = 3
    assert view(0.5)[0] == 2.0
    assert view(1.0)[0] == 3.0
    out = view(np.array([0.5, 0.75, 1.0]))
    assert out.shape == (3, 1)
    assert out[1, 0] == path_eval(SIMPLE, 1.5)[0]


def test_segment_view_theta_domain():
    view = segment(SIMPLE, 2.0)
    with pytest.raises(OutOfDomain):
        view(0.49)
    with pytest.raises(OutOfDomain):
        view(1.01)
    # boundary values within tolerance are clipped, not rejected
    assert view(1.0 + 1e-13)[0] == 3.0


def test_sup_norm_exact_over_breakpoints():
    view = segment(SIMPLE, 2.0)
    # max |x| over [1, 2] is at the node x(2) = 3
    assert sup_norm(view) == 3.0
    view2 = segment(SIMPLE, 1.5)
    # over [0.75, 1.5]: nodes 1.0 (2.0) and 1.5 (1.0), endpoint 0.75 (1.0)
    assert sup_norm(view2) == 2.0


def test_sup_norm_needs_two_nodes():
    with pytest.raises(ValueError):
        sup_norm(segment(SIMPLE, 2.0), nodes=1)


@given(st.lists(st.floats(min_value=-10, max_value=10), min_size=4,
                max_size=12),
       st.floats(min_value=1.0, max_value=2.0))
@settings(max_examples=60, deadline=None)
def test_sup_norm_matches_dense_sampling(vals, anchor):
    times = np.linspace(0.5, 2.0, len(vals))
    p = make_path(times, vals)
    view = segment(p, anchor)
    got = sup_norm(view)
    lo, hi = 0.5 * anchor, anchor
    # independent truth: a piecewise-linear |x| attains its max at a
    # breakpoint or a segment endpoint
    cands = np.concatenate(([lo, hi], times[(times > lo) & (times < hi)]))
    truth = np.abs(path_eval(p, cands)[:, 0]).max()
    assert got == pytest.approx(truth, abs=1e-12)
    # dense sampling can only under-estimate a piecewise-linear sup
    dense = np.linspace(lo, hi, 4001)
    brute = np.abs(path_eval(p, dense)[:, 0]).max()
    assert got >= brute - 1e-12


def test_constant_segment():
    seg = ConstantSegment(0.5, 0.7)
    assert seg.point[0] == 0.5
    assert seg(0.9)[0] == 0.5
    out = seg(np.array([0.7, 1.0]))
    assert out.shape == (2, 1)
    assert np.all(out == 0.5)


def test_function_segment_scalar_fn():
    seg = FunctionSegment(lambda th: th ** 2, 0.5)
    assert seg.point[0] == 1.0
    assert seg(0.5)[0] == 0.25
    out = seg(np.array([0.5, 1.0]))
    assert out.shape == (2, 1)
    assert out[0, 0] == 0.25


def test_function_segment_vectorized_fn():
    seg = FunctionSegment(lambda th: th ** 2, 0.5, vectorized=True)
    out = seg(np.array([0.5, 1.0]))
    assert out.shape == (2, 1)
    assert np.allclose(out[:, 0], [0.25, 1.0])


def test_write_csv_layout_and_determinism(tmp_path):
    p = make_path([0.5, 1.0, 2.0], [0.25, 0.5, -1.0],
                  regimes=[1, 1, 2])
    buf = io.StringIO()
    write_csv(p, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "time,regime,x_1"
    assert lines[1] == "0.5,1,0.25"
    assert lines[3] == "2,2,-1"
    f1 = tmp_path / "a.csv"
    f2 = tmp_path / "b.csv"
    write_csv(p, str(f1))
    write_csv(p, str(f2))
    assert f1.read_bytes() == f2.read_bytes()


def test_write_csv_multidimensional():
    times = np.array([0.5, 1.0, 1.5])
    values = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    p = DensePath(times=times, values=values,
                  regimes=np.ones(3, dtype=np.int64), theta_lower=0.5,
                  t0=1.0)
    buf = io.StringIO()
    write_csv(p, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "time,regime,x_1,x_2"
    assert lines[2] == "1,1,3,4"


def test_csv_round_trip_is_value_exact(tmp_path):
    rng = np.random.default_rng(4)
    times = np.sort(np.concatenate(([0.5, 1.0], 1.0 + rng.random(20))))
    p = make_path(times, rng.standard_normal(len(times)))
    dest = tmp_path / "p.csv"
    write_csv(p, str(dest))
    back = np.loadtxt(str(dest), delimiter=",", skiprows=1)
    assert np.array_equal(back[:, 0], p.times)
    assert np.array_equal(back[:, 2], p.values[:, 0])
