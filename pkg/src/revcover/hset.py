"""Affine h-sets: coordinate charts, transposes, symmetric images, wall grids.

An h-set is a parallelepiped M([-1,1]^n) + x under the maximum norm, with the
first u columns of M spanning the nominally unstable directions and the last s
columns the stable ones. The chart c(v) = M^{-1}(v - x) maps the support onto
the unit cube; a verified enclosure of M^{-1} is certified at construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .interval import (
    DomainError,
    IBox,
    IMatrix,
    iadd,
    imat_inverse,
    imat_mul,
    imat_vec,
    isub,
)


class EmptyExitSetError(Exception):
    """The exit set is empty (no unstable directions), so no exit grid exists."""


@dataclass(frozen=True)
class LinearReversor:
    """Linear involution S (S @ S = identity, exactly on representable entries)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        n = m.shape[0]
        if m.shape != (n, n):
            raise DomainError("reversor matrix must be square")
        if not np.array_equal(m @ m, np.eye(n)):
            raise DomainError("reversor is not an exact involution")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)

    def apply_box(self, b: IBox) -> IBox:
        return imat_vec(IMatrix.from_point(self.matrix), b)

    def fixes(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return np.array_equal(self.matrix @ x, x)


def coordinate_reflection(n: int, negated: tuple[int, ...]) -> LinearReversor:
    """Reversor negating the listed coordinates, e.g. (0, 1) for a 4-d map."""
    d = np.ones(n)
    d[list(negated)] = -1.0
    return LinearReversor(np.diag(d))


@dataclass(frozen=True)
class FacetTag:
    """One facet of the chart cube: coordinate `axis` pinned at `sign`."""

    axis: int
    sign: int


@dataclass(frozen=True)
class WallCell:
    """A grid cell on a wall of the chart cube, split into (u, s) parts."""

    unstable_part: IBox
    stable_part: IBox
    tag: FacetTag

    def chart_box(self) -> IBox:
        return IBox(
            np.concatenate([self.unstable_part.lo, self.stable_part.lo]),
            np.concatenate([self.unstable_part.hi, self.stable_part.hi]),
        )


class HSet:
    """Affine h-set with a certified inverse chart.

    Equality compares (center, direction columns, u, s); the name and any
    recorded decimal sources are metadata.
    """

    __slots__ = ("name", "center", "matrix", "u", "s", "inv_matrix", "decimal_source")

    def __init__(self, name: str, center, matrix, u: int, s: int, decimal_source=None):
        center = np.asarray(center, dtype=float).copy()
        matrix = np.asarray(matrix, dtype=float).copy()
        n = center.shape[0]
        if u < 0 or s < 0 or u + s != n:
            raise DomainError(f"u + s must equal the dimension ({u}+{s} != {n})")
        if matrix.shape != (n, n):
            raise DomainError("direction matrix must be n x n")
        center.flags.writeable = False
        matrix.flags.writeable = False
        object.__setattr__(self, "name", str(name))
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "u", int(u))
        object.__setattr__(self, "s", int(s))
        # raises SingularMatrixError when no verified inverse exists
        object.__setattr__(self, "inv_matrix", imat_inverse(matrix))
        object.__setattr__(self, "decimal_source", decimal_source)

    def __setattr__(self, *a):
        raise AttributeError("HSet is immutable")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def chart(self, v: IBox) -> IBox:
        """c(v) = M^{-1}(v - x), rigorous."""
        d = IBox(*isub(v.lo, v.hi, self.center, self.center))
        return imat_vec(self.inv_matrix, d)

    def chart_point(self, v) -> np.ndarray:
        """Float chart of a point, for diagnostics only."""
        return np.linalg.solve(self.matrix, np.asarray(v, dtype=float) - self.center)

    def chart_inverse(self, w: IBox) -> IBox:
        """c^{-1}(w) = M w + x, rigorous."""
        img = imat_vec(IMatrix.from_point(self.matrix), w)
        return IBox(*iadd(img.lo, img.hi, self.center, self.center))

    def support_box(self) -> IBox:
        """Ambient axis-aligned enclosure of the support M([-1,1]^n) + x."""
        cube = IBox(-np.ones(self.dim), np.ones(self.dim))
        return self.chart_inverse(cube)

    def __eq__(self, other):
        if not isinstance(other, HSet):
            return NotImplemented
        return (
            self.u == other.u
            and self.s == other.s
            and np.array_equal(self.center, other.center)
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        return hash((self.center.tobytes(), self.matrix.tobytes(), self.u, self.s))

    def __repr__(self):
        return f"HSet({self.name!r}, dim={self.dim}, u={self.u}, s={self.s})"


def transpose(N: HSet) -> HSet:
    """Same support, unstable and stable roles swapped (column blocks permuted)."""
    m = np.concatenate([N.matrix[:, N.u :], N.matrix[:, : N.u]], axis=1)
    return HSet(f"{N.name}^T", N.center, m, N.s, N.u)


def sym_image(S: LinearReversor, N: HSet) -> HSet:
    """Transposed symmetric image: support S(|N|), directions S M with the
    unstable and stable column blocks swapped."""
    if S.dim != N.dim:
        raise DomainError("reversor dimension mismatch")
    sm = S.matrix @ N.matrix
    m = np.concatenate([sm[:, N.u :], sm[:, : N.u]], axis=1)
    return HSet(canonical_sym_name(N.name), S.apply(N.center), m, N.s, N.u)


def canonical_sym_name(name: str) -> str:
    prefix = "S^T*"
    if name.startswith(prefix):
        return name[len(prefix) :]
    return prefix + name


def st_symmetric_check(S: LinearReversor, N: HSet) -> bool:
    """True iff S fixes the center exactly and maps each unstable column onto
    the corresponding stable column bit-exactly (then sym_image(S, N) == N)."""
    if N.u != N.s:
        return False
    if not S.fixes(N.center):
        return False
    return np.array_equal(S.matrix @ N.matrix[:, : N.u], N.matrix[:, N.u :])


def _facet_cells_arrays(n: int, axes, resolution: int):
    """Initial grid cells for the listed pinned axes, as (lo, hi, tags) arrays.

    Each facet {coord_axis = sign} is split into resolution parts along every
    free coordinate; closed cells share facets, so the union covers the wall.
    """
    if resolution < 1:
        raise DomainError("resolution must be >= 1")
    t = np.linspace(-1.0, 1.0, resolution + 1)
    los, his, tags = [], [], []
    nfree = n - 1
    ncells = resolution**nfree
    for axis in axes:
        free = [i for i in range(n) if i != axis]
        idx = np.unravel_index(np.arange(ncells), (resolution,) * nfree) if nfree else ()
        for sign in (-1.0, 1.0):
            lo = np.empty((ncells, n))
            hi = np.empty((ncells, n))
            lo[:, axis] = sign
            hi[:, axis] = sign
            for j, c in enumerate(free):
                lo[:, c] = t[idx[j]]
                hi[:, c] = t[idx[j] + 1]
            los.append(lo)
            his.append(hi)
            tags.extend([FacetTag(axis, int(sign))] * ncells)
    return np.concatenate(los), np.concatenate(his), tags


def exit_grid(N: HSet, resolution: int) -> Iterator[WallCell]:
    """Cells covering the exit wall: boundary of the unstable cube times the
    full stable cube. Requires at least one unstable direction."""
    if N.u == 0:
        raise EmptyExitSetError("h-set has no unstable directions; exit set is empty")
    lo, hi, tags = _facet_cells_arrays(N.dim, range(N.u), resolution)
    u = N.u
    for i in range(len(lo)):
        yield WallCell(IBox(lo[i, :u], hi[i, :u]), IBox(lo[i, u:], hi[i, u:]), tags[i])


def boundary_grid(N: HSet, resolution: int) -> Iterator[WallCell]:
    """Cells covering the full boundary of the chart cube (all 2n facets)."""
    lo, hi, tags = _facet_cells_arrays(N.dim, range(N.dim), resolution)
    u = N.u
    for i in range(len(lo)):
        yield WallCell(IBox(lo[i, :u], hi[i, :u]), IBox(lo[i, u:], hi[i, u:]), tags[i])


def supports_disjoint(N: HSet, M: HSet) -> bool:
    """True only with a rigorous separation proof; False means inconclusive.

    Tries a separating ambient coordinate first, then encloses each support in
    the other's chart and looks for a chart coordinate clear of [-1, 1].
    """
    if N.dim != M.dim:
        raise DomainError("ambient dimension mismatch")
    a = N.support_box()
    b = M.support_box()
    if np.any(a.hi < b.lo) or np.any(b.hi < a.lo):
        return True
    cube = IBox(-np.ones(N.dim), np.ones(N.dim))
    for src, dst in ((N, M), (M, N)):
        T = imat_mul(dst.inv_matrix, IMatrix.from_point(src.matrix))
        off = imat_vec(
            dst.inv_matrix, IBox(*isub(src.center, src.center, dst.center, dst.center))
        )
        img = imat_vec(T, cube)
        lo, hi = iadd(img.lo, img.hi, off.lo, off.hi)
        if np.any(hi < -1.0) or np.any(lo > 1.0):
            return True
    return False


# --- file format: one JSON object per file, decimal strings preserved ---

def hset_to_dict(N: HSet) -> dict:
    return {
        "name": N.name,
        "center": [repr(float(x)) for x in N.center],
        "matrix": [[repr(float(x)) for x in row] for row in N.matrix],
        "u": N.u,
        "s": N.s,
    }


def hset_from_dict(d: dict) -> HSet:
    try:
        name = d["name"]
        center = [float(x) for x in d["center"]]
        matrix = [[float(x) for x in row] for row in d["matrix"]]
        u = int(d["u"])
        s = int(d["s"])
    except (KeyError, TypeError, ValueError) as e:
        raise DomainError(f"malformed h-set object: {e}") from e
    source = {
        "center": [str(x) for x in d["center"]],
        "matrix": [[str(x) for x in row] for row in d["matrix"]],
    }
    return HSet(name, center, matrix, u, s, decimal_source=source)


def save_hset(N: HSet, path) -> None:
    with open(path, "w") as fh:
        json.dump(hset_to_dict(N), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_hset(path) -> HSet:
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as e:
            raise DomainError(f"not valid JSON: {e}") from e
    return hset_from_dict(d)
