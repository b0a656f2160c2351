"""H-set charts, transposes, symmetric images, wall grids and the file format."""

import numpy as np
import pytest

from revcover.hset import (
    EmptyExitSetError,
    HSet,
    LinearReversor,
    boundary_grid,
    coordinate_reflection,
    exit_grid,
    hset_from_dict,
    load_hset,
    save_hset,
    st_symmetric_check,
    supports_disjoint,
    sym_image,
    transpose,
)
from revcover.interval import DomainError, IBox, SingularMatrixError


def unit_hset(n=4, u=2):
    return HSet("I", np.zeros(n), np.eye(n), u, n - u)


def test_unit_cube_support():
    N = unit_hset()
    s = N.support_box()
    assert s.contains_box(IBox(-np.ones(4), np.ones(4)))
    assert float(np.max(np.abs(s.lo + 1))) < 1e-14 and float(np.max(np.abs(s.hi - 1))) < 1e-14


def test_instance_hsets_match_frame_data(data):
    N1 = data.hset("N1")
    assert N1.center[2] == -2.9288690017630725
    assert np.array_equal(
        N1.matrix[:, 0], 0.012 * data.vectors["u1_P1"]
    )
    N2 = data.hset("N2")
    assert np.array_equal(N2.matrix[:, 1], 0.31 * data.vectors["u2_P2"])
    assert N1.u == N1.s == 2


def test_singular_directions_rejected():
    with pytest.raises(SingularMatrixError):
        HSet("bad", np.zeros(2), np.array([[1.0, 2.0], [2.0, 4.0]]), 1, 1)


def test_dimension_validation():
    with pytest.raises(DomainError):
        HSet("bad", np.zeros(3), np.eye(3), 1, 1)


def test_chart_round_trip(data, rng):
    for name in ("N1", "H2"):
        N = data.hset(name)
        pts = rng.uniform(-1, 1, size=(1000, 4)) @ N.matrix.T + N.center
        for v in pts[:50]:
            w = N.chart(IBox.point(v))
            back = N.chart_inverse(w)
            assert back.contains_point(v)
        # vectorized membership for the rest
        charts = np.linalg.solve(N.matrix, (pts - N.center).T).T
        assert np.all(np.abs(charts) <= 1 + 1e-9)


def test_transpose_involution():
    N = unit_hset()
    assert transpose(transpose(N)) == N


def test_transpose_swaps_blocks(data):
    N = data.hset("N1")
    T = transpose(N)
    assert T.u == N.s and T.s == N.u
    assert np.array_equal(T.matrix[:, : T.u], N.matrix[:, N.u :])
    assert np.array_equal(T.matrix[:, T.u :], N.matrix[:, : N.u])


def test_transpose_exit_is_entry(data, rng):
    """A point on the entry wall of N lies on the exit wall of its transpose."""
    N = data.hset("N1")
    T = transpose(N)
    for _ in range(200):
        p = rng.uniform(-1, 1, size=2)
        q = rng.uniform(-1, 1, size=2)
        q[rng.integers(0, 2)] = rng.choice([-1.0, 1.0])  # stable boundary
        v = N.chart_inverse(IBox.point(np.concatenate([p, q])))
        w = T.chart(v)
        # unstable block of the transpose chart is the old stable block
        assert np.max(w.hi[: T.u]) >= 1.0 - 1e-12 or np.min(w.lo[: T.u]) <= -1.0 + 1e-12


def test_sym_image_instance(data):
    S = data.reversor
    N1 = data.hset("N1")
    assert sym_image(S, N1) == N1
    H1 = data.hset("H1")
    img = sym_image(S, H1)
    assert np.array_equal(img.center, S.apply(data.Q1))
    assert img.center[0] == -data.Q1[0] and img.center[2] == data.Q1[2]
    assert img.u == H1.s and img.s == H1.u


def test_sym_image_involution(rng):
    S = coordinate_reflection(4, (0, 1))
    M = rng.normal(size=(4, 4)) + 3 * np.eye(4)
    N = HSet("X", rng.normal(size=4), M, 2, 2)
    assert sym_image(S, sym_image(S, N)) == N


def test_st_symmetric_checks(data):
    S = data.reversor
    assert st_symmetric_check(S, data.hset("N1"))
    assert st_symmetric_check(S, data.hset("N2"))
    assert not st_symmetric_check(S, data.hset("H1"))  # center off the fixed space


def test_st_symmetric_implies_field_equality(rng):
    S = coordinate_reflection(4, (0, 1))
    for _ in range(20):
        U = rng.normal(size=(4, 2))
        M = np.column_stack([U, S.matrix @ U])
        center = np.array([0.0, 0.0, *rng.normal(size=2)])
        try:
            N = HSet("sym", center, M, 2, 2)
        except SingularMatrixError:
            continue
        assert st_symmetric_check(S, N)
        assert sym_image(S, N) == N


def test_reversor_validation():
    with pytest.raises(DomainError):
        LinearReversor(np.array([[1.0, 1.0], [0.0, 1.0]]))
    S = coordinate_reflection(2, (0,))
    assert S.fixes([0.0, 3.0]) and not S.fixes([1.0, 3.0])


def test_exit_grid_1d_point_cells():
    N = HSet("L", np.zeros(1), np.eye(1), 1, 0)
    cells = list(exit_grid(N, 1))
    assert len(cells) == 2
    pts = sorted(float(c.unstable_part.lo[0]) for c in cells)
    assert pts == [-1.0, 1.0]
    assert all(c.unstable_part.widths()[0] == 0.0 for c in cells)
    assert all(c.stable_part.dim == 0 for c in cells)


def test_exit_grid_requires_unstable():
    N = HSet("C", np.zeros(2), np.eye(2), 0, 2)
    with pytest.raises(EmptyExitSetError):
        next(exit_grid(N, 1))


def test_exit_grid_coverage(data, rng):
    N = unit_hset()
    cells = list(exit_grid(N, 3))
    assert len(cells) == 2 * 2 * 3**3
    boxes = [c.chart_box() for c in cells]
    for _ in range(10_000):
        p = rng.uniform(-1, 1, size=2)
        p[rng.integers(0, 2)] = rng.choice([-1.0, 1.0])
        q = rng.uniform(-1, 1, size=2)
        x = np.concatenate([p, q])
        assert any(b.contains_point(x) for b in boxes)


def test_exit_grid_refinement_keeps_coverage(rng):
    N = unit_hset()
    coarse = [c.chart_box() for c in exit_grid(N, 1)]
    fine = [c.chart_box() for c in exit_grid(N, 4)]
    for _ in range(2000):
        p = rng.uniform(-1, 1, size=2)
        p[rng.integers(0, 2)] = rng.choice([-1.0, 1.0])
        x = np.concatenate([p, rng.uniform(-1, 1, size=2)])
        assert any(b.contains_point(x) for b in coarse)
        assert any(b.contains_point(x) for b in fine)


def test_boundary_grid_square():
    N = HSet("sq", np.zeros(2), np.eye(2), 1, 1)
    cells = list(boundary_grid(N, 1))
    assert len(cells) == 4
    tags = {(c.tag.axis, c.tag.sign) for c in cells}
    assert tags == {(0, -1), (0, 1), (1, -1), (1, 1)}


def test_boundary_grid_coverage_4d(rng):
    N = unit_hset()
    cells = list(boundary_grid(N, 2))
    assert len({(c.tag.axis, c.tag.sign) for c in cells}) == 8
    boxes = [c.chart_box() for c in cells]
    for _ in range(10_000):
        x = rng.uniform(-1, 1, size=4)
        x[rng.integers(0, 4)] = rng.choice([-1.0, 1.0])
        assert any(b.contains_point(x) for b in boxes)


def test_boundary_contains_exit_facets():
    N = unit_hset()
    exit_tags = {(c.tag.axis, c.tag.sign) for c in exit_grid(N, 2)}
    bnd_tags = {(c.tag.axis, c.tag.sign) for c in boundary_grid(N, 2)}
    assert exit_tags <= bnd_tags


def test_supports_disjoint_examples(data):
    a = HSet("A", np.zeros(4), np.eye(4), 2, 2)
    b = HSet("B", np.array([10.0, 0, 0, 0]), np.eye(4), 2, 2)
    assert supports_disjoint(a, b)
    assert not supports_disjoint(a, a)
    assert supports_disjoint(data.hset("N1"), data.hset("N2"))


def test_supports_disjoint_needs_chart_argument():
    """Overlapping ambient enclosures but separated in chart coordinates."""
    R = np.array([[1.0, 1.0], [-1.0, 1.0]])  # rotated squares |v|_1 <= 2
    a = HSet("A", np.zeros(2), R, 1, 1)
    b = HSet("B", np.array([2.5, 2.0]), R, 1, 1)  # 1-norm distance 4.5 > 4
    ab, bb = a.support_box(), b.support_box()
    assert np.all(ab.hi > bb.lo) and np.all(bb.hi > ab.lo)  # ambient boxes overlap
    assert supports_disjoint(a, b)


def test_file_round_trip(tmp_path, data):
    N = data.hset("H3")
    path = tmp_path / "h3.json"
    save_hset(N, path)
    loaded = load_hset(path)
    assert loaded == N
    assert loaded.name == N.name
    assert loaded.decimal_source is not None


def test_file_malformed(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(DomainError):
        load_hset(p)
    with pytest.raises(DomainError):
        hset_from_dict({"name": "x", "center": ["0", "0"], "matrix": [["1"]], "u": 1, "s": 1})
