"""Outward-rounded interval arithmetic for scalars, boxes and matrices.

Every operation returns an enclosure of the exact real-arithmetic result set.
Outward rounding is realized by next-representable widening: a result computed
in round-to-nearest differs from the exact value by at most half an ulp, so
stepping each endpoint one float outward always yields a rigorous bound. The
kernel functions (iadd, isub, imul, idiv, iscale) accept floats or numpy
arrays and are the single source of truth for both the scalar Interval class
and the vectorized batch pipelines.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

_NINF = float("-inf")
_PINF = float("inf")


class DomainError(Exception):
    """Operand outside an operation's domain (e.g. division by an interval containing 0)."""


class DegenerateBoxError(Exception):
    """Bisection requested on a box with no coordinate of positive width."""


class SingularMatrixError(Exception):
    """Pivot interval contains 0: a verified inverse cannot be produced.

    This is a failure to verify invertibility, not a claim of singularity.
    """


class IndeterminateSignError(Exception):
    """The rigorous determinant enclosure contains 0, so no sign can be certified."""


def _down(a):
    return np.nextafter(a, _NINF)


def _up(a):
    return np.nextafter(a, _PINF)


def iadd(alo, ahi, blo, bhi):
    return _down(alo + blo), _up(ahi + bhi)


def isub(alo, ahi, blo, bhi):
    return _down(alo - bhi), _up(ahi - blo)


def imul(alo, ahi, blo, bhi):
    """[alo,ahi] * [blo,bhi]; each of the four candidate products is widened
    one ulp before min/max so the argmin/argmax choice is itself rigorous."""
    c1 = alo * blo
    c2 = alo * bhi
    c3 = ahi * blo
    c4 = ahi * bhi
    lo = np.minimum(np.minimum(_down(c1), _down(c2)), np.minimum(_down(c3), _down(c4)))
    hi = np.maximum(np.maximum(_up(c1), _up(c2)), np.maximum(_up(c3), _up(c4)))
    return lo, hi


def idiv(alo, ahi, blo, bhi):
    """Division; the divisor must exclude 0 (raises DomainError otherwise)."""
    if np.any((np.asarray(blo) <= 0.0) & (np.asarray(bhi) >= 0.0)):
        raise DomainError("division by an interval containing 0")
    c1 = alo / blo
    c2 = alo / bhi
    c3 = ahi / blo
    c4 = ahi / bhi
    lo = np.minimum(np.minimum(_down(c1), _down(c2)), np.minimum(_down(c3), _down(c4)))
    hi = np.maximum(np.maximum(_up(c1), _up(c2)), np.maximum(_up(c3), _up(c4)))
    return lo, hi


def iscale(alo, ahi, c: float):
    """Multiply by a point scalar."""
    if c >= 0.0:
        return _down(c * alo), _up(c * ahi)
    return _down(c * ahi), _up(c * alo)


def ineg(alo, ahi):
    # negation is exact in binary floating point
    return -ahi, -alo


@contextmanager
def compute_region():
    """Guard for entering an interval computation region on a worker thread.

    The widening-based rounding used here needs no per-thread setup, so this
    is a documented no-op. Callers that swap in a rounding-mode based backend
    must establish the mode inside this guard.
    """
    yield


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval [lo, hi] with double endpoints; lo <= hi, never NaN.

    Zero-width intervals are first-class exact points. Empty intervals are not
    representable: emptiness of an intersection is a query, not a value.
    """

    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise DomainError("NaN endpoint")
        if self.lo > self.hi:
            raise DomainError(f"inverted endpoints: [{self.lo}, {self.hi}]")

    @staticmethod
    def point(x: float) -> "Interval":
        return Interval(float(x), float(x))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        m = 0.5 * (self.lo + self.hi)
        if not math.isfinite(m):
            m = 0.5 * self.lo + 0.5 * self.hi
        return m

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def _coerce(self, other) -> "Interval":
        if isinstance(other, Interval):
            return other
        if isinstance(other, (int, float)):
            return Interval.point(other)
        return NotImplemented

    def _is_point(self, value: float) -> bool:
        return self.lo == value and self.hi == value

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        # adding an exact zero is exact; keeps identity-like data width-free
        if o._is_point(0.0):
            return self
        if self._is_point(0.0):
            return o
        lo, hi = iadd(self.lo, self.hi, o.lo, o.hi)
        return Interval(float(lo), float(hi))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o._is_point(0.0):
            return self
        if self._is_point(0.0):
            return -o
        lo, hi = isub(self.lo, self.hi, o.lo, o.hi)
        return Interval(float(lo), float(hi))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        # exact cases: multiplication by a point 0, 1 or -1 never rounds
        for a, b in ((self, o), (o, self)):
            if a._is_point(0.0):
                return Interval(0.0, 0.0)
            if a._is_point(1.0):
                return b
            if a._is_point(-1.0):
                return -b
        lo, hi = imul(self.lo, self.hi, o.lo, o.hi)
        return Interval(float(lo), float(hi))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o.lo <= 0.0 <= o.hi:
            raise DomainError("division by an interval containing 0")
        if self._is_point(0.0):
            return Interval(0.0, 0.0)
        if o._is_point(1.0):
            return self
        if o._is_point(-1.0):
            return -self
        lo, hi = idiv(self.lo, self.hi, o.lo, o.hi)
        return Interval(float(lo), float(hi))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        lo, hi = idiv(o.lo, o.hi, self.lo, self.hi)
        return Interval(float(lo), float(hi))

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __repr__(self):
        return f"[{self.lo!r}, {self.hi!r}]"


def iv_arith(a: Interval, b: Interval, op: str) -> Interval:
    """Dispatch one of {add, sub, mul, div} on two intervals."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise DomainError(f"unknown op {op!r}")


class IBox:
    """Axis-aligned interval box in R^n, stored as lo/hi float arrays."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo = np.atleast_1d(np.asarray(lo, dtype=float)).copy()
        hi = np.atleast_1d(np.asarray(hi, dtype=float)).copy()
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DomainError("box bounds must be 1-d arrays of equal length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise DomainError("invalid box bounds")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, *a):
        raise AttributeError("IBox is immutable")

    @staticmethod
    def point(x) -> "IBox":
        x = np.asarray(x, dtype=float)
        return IBox(x, x)

    @staticmethod
    def from_intervals(ivs) -> "IBox":
        return IBox([iv.lo for iv in ivs], [iv.hi for iv in ivs])

    @staticmethod
    def cube(center, radius: float) -> "IBox":
        c = np.asarray(center, dtype=float)
        return IBox(c - radius, c + radius)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def coords(self) -> tuple:
        return tuple(Interval(float(l), float(h)) for l, h in zip(self.lo, self.hi))

    def __getitem__(self, i: int) -> Interval:
        return Interval(float(self.lo[i]), float(self.hi[i]))

    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    def mid(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def contains_point(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.lo <= x) and np.all(x <= self.hi))

    def contains_box(self, other: "IBox") -> bool:
        return bool(np.all(self.lo <= other.lo) and np.all(other.hi <= self.hi))

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        """m member points, shape (m, n); endpoints included via clipping."""
        u = rng.uniform(0.0, 1.0, size=(m, self.dim))
        pts = self.lo + u * (self.hi - self.lo)
        return np.clip(pts, self.lo, self.hi)

    def __eq__(self, other):
        if not isinstance(other, IBox):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    def __hash__(self):
        return hash((self.lo.tobytes(), self.hi.tobytes()))

    def __repr__(self):
        parts = ", ".join(f"[{l!r},{h!r}]" for l, h in zip(self.lo, self.hi))
        return f"IBox({parts})"


def box_hull(a: IBox, b: IBox) -> IBox:
    """Smallest box containing a and b, per coordinate."""
    if a.dim != b.dim:
        raise DomainError("dimension mismatch in box_hull")
    return IBox(np.minimum(a.lo, b.lo), np.maximum(a.hi, b.hi))


def box_bisect(b: IBox) -> tuple[IBox, IBox]:
    """Split at the midpoint of the widest coordinate.

    The two halves share the splitting hyperplane, so their union covers b.
    """
    w = b.widths()
    if np.all(w <= 0.0):
        raise DegenerateBoxError("cannot bisect a point box")
    ax = int(np.argmax(w))
    m = 0.5 * (b.lo[ax] + b.hi[ax])
    left_hi = b.hi.copy()
    left_hi[ax] = m
    right_lo = b.lo.copy()
    right_lo[ax] = m
    return IBox(b.lo, left_hi), IBox(right_lo, b.hi)


class IMatrix:
    """Matrix of intervals, stored as lo/hi float arrays of shape (n, m)."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        lo = np.asarray(lo, dtype=float).copy()
        hi = np.asarray(hi, dtype=float).copy()
        if lo.shape != hi.shape or lo.ndim != 2:
            raise DomainError("matrix bounds must be 2-d arrays of equal shape")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise DomainError("invalid matrix bounds")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, *a):
        raise AttributeError("IMatrix is immutable")

    @staticmethod
    def from_point(m) -> "IMatrix":
        m = np.asarray(m, dtype=float)
        return IMatrix(m, m)

    @property
    def shape(self) -> tuple[int, int]:
        return self.lo.shape

    def entry(self, i: int, j: int) -> Interval:
        return Interval(float(self.lo[i, j]), float(self.hi[i, j]))

    @property
    def entries(self) -> list:
        n, m = self.shape
        return [[self.entry(i, j) for j in range(m)] for i in range(n)]

    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    def mid(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def contains_matrix(self, m) -> bool:
        m = np.asarray(m, dtype=float)
        return bool(np.all(self.lo <= m) and np.all(m <= self.hi))

    def __matmul__(self, other):
        if isinstance(other, IMatrix):
            return imat_mul(self, other)
        if isinstance(other, IBox):
            return imat_vec(self, other)
        if isinstance(other, np.ndarray):
            if other.ndim == 1:
                return imat_vec(self, IBox.point(other))
            return imat_mul(self, IMatrix.from_point(other))
        return NotImplemented

    def __repr__(self):
        return f"IMatrix(shape={self.shape}, max_width={float(np.max(self.widths())):.3g})"


def imat_vec(M: IMatrix, v: IBox) -> IBox:
    """Enclosure of {Ax : A in M, x in v}."""
    n, m = M.shape
    if v.dim != m:
        raise DomainError("shape mismatch in imat_vec")
    acc_lo = np.zeros(n)
    acc_hi = np.zeros(n)
    for j in range(m):
        plo, phi = imul(M.lo[:, j], M.hi[:, j], v.lo[j], v.hi[j])
        acc_lo = _down(acc_lo + plo)
        acc_hi = _up(acc_hi + phi)
    return IBox(acc_lo, acc_hi)


def imat_mul(A: IMatrix, B: IMatrix) -> IMatrix:
    """Enclosure of the product of any member matrices."""
    n, m = A.shape
    m2, k = B.shape
    if m != m2:
        raise DomainError("shape mismatch in imat_mul")
    acc_lo = np.zeros((n, k))
    acc_hi = np.zeros((n, k))
    for j in range(m):
        plo, phi = imul(
            A.lo[:, j][:, None], A.hi[:, j][:, None], B.lo[j, :][None, :], B.hi[j, :][None, :]
        )
        acc_lo = _down(acc_lo + plo)
        acc_hi = _up(acc_hi + phi)
    return IMatrix(acc_lo, acc_hi)


def box_add(a: IBox, b: IBox) -> IBox:
    return IBox(*iadd(a.lo, a.hi, b.lo, b.hi))


def box_sub(a: IBox, b: IBox) -> IBox:
    return IBox(*isub(a.lo, a.hi, b.lo, b.hi))


# --- vectorized kernels over cell batches (arrays of shape (B, n)) ---

def affine_batch(M: np.ndarray, x: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """Enclosures of M @ v + x for each interval vector v in the batch."""
    p1 = M[None, :, :] * lo[:, None, :]
    p2 = M[None, :, :] * hi[:, None, :]
    plo = _down(np.minimum(p1, p2))
    phi = _up(np.maximum(p1, p2))
    acc_lo = np.zeros(lo.shape)
    acc_hi = np.zeros(hi.shape)
    for j in range(M.shape[1]):
        acc_lo = _down(acc_lo + plo[:, :, j])
        acc_hi = _up(acc_hi + phi[:, :, j])
    return _down(acc_lo + x[None, :]), _up(acc_hi + x[None, :])


def imat_vec_batch(Ml: np.ndarray, Mh: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """One fixed interval matrix applied to a batch of interval vectors."""
    n = Ml.shape[0]
    acc_lo = np.zeros((lo.shape[0], n))
    acc_hi = np.zeros((lo.shape[0], n))
    for j in range(Ml.shape[1]):
        plo, phi = imul(Ml[None, :, j], Mh[None, :, j], lo[:, j][:, None], hi[:, j][:, None])
        acc_lo = _down(acc_lo + plo)
        acc_hi = _up(acc_hi + phi)
    return acc_lo, acc_hi


def imatmul_batch(Al, Ah, Bl, Bh):
    """Batched interval matrix product: (B,n,m) @ (B,m,k)."""
    nb, n, m = Al.shape
    k = Bl.shape[2]
    acc_lo = np.zeros((nb, n, k))
    acc_hi = np.zeros((nb, n, k))
    for j in range(m):
        plo, phi = imul(
            Al[:, :, j][:, :, None],
            Ah[:, :, j][:, :, None],
            Bl[:, j, :][:, None, :],
            Bh[:, j, :][:, None, :],
        )
        acc_lo = _down(acc_lo + plo)
        acc_hi = _up(acc_hi + phi)
    return acc_lo, acc_hi


def imatvec_cellwise(Al, Ah, lo, hi):
    """Batched interval matrix (B,n,m) applied to per-cell vectors (B,m)."""
    nb, n, m = Al.shape
    acc_lo = np.zeros((nb, n))
    acc_hi = np.zeros((nb, n))
    for j in range(m):
        plo, phi = imul(Al[:, :, j], Ah[:, :, j], lo[:, j][:, None], hi[:, j][:, None])
        acc_lo = _down(acc_lo + plo)
        acc_hi = _up(acc_hi + phi)
    return acc_lo, acc_hi


def _mignitude(lo: float, hi: float) -> float:
    # distance of the interval from 0; 0 if it contains 0
    if lo <= 0.0 <= hi:
        return 0.0
    return min(abs(lo), abs(hi))


def _gauss_eliminate(rows: list[list[Interval]], ncols: int):
    """In-place interval Gaussian elimination with mignitude partial pivoting.

    Returns (pivot_intervals, swap_parity). Raises SingularMatrixError when no
    candidate pivot excludes 0.
    """
    n = len(rows)
    parity = 1
    pivots = []
    for c in range(n):
        best, best_mig = c, _mignitude(rows[c][c].lo, rows[c][c].hi)
        for r in range(c + 1, n):
            mig = _mignitude(rows[r][c].lo, rows[r][c].hi)
            if mig > best_mig:
                best, best_mig = r, mig
        if best_mig == 0.0:
            raise SingularMatrixError(f"pivot interval in column {c} contains 0")
        if best != c:
            rows[c], rows[best] = rows[best], rows[c]
            parity = -parity
        piv = rows[c][c]
        pivots.append(piv)
        for r in range(c + 1, n):
            if rows[r][c].lo == 0.0 and rows[r][c].hi == 0.0:
                continue
            factor = rows[r][c] / piv
            rows[r][c] = Interval.point(0.0)
            for j in range(c + 1, ncols):
                rows[r][j] = rows[r][j] - factor * rows[c][j]
    return pivots, parity


def imat_inverse(M) -> IMatrix:
    """Verified enclosure of the inverse of a point matrix.

    Interval Gaussian elimination with partial pivoting on [M | I]; every
    pivot interval is certified to exclude 0, so the exact inverse is a
    member of the returned enclosure.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n):
        raise DomainError("imat_inverse needs a square matrix")
    rows = [
        [Interval.point(M[i, j]) for j in range(n)]
        + [Interval.point(1.0 if i == j else 0.0) for j in range(n)]
        for i in range(n)
    ]
    _gauss_eliminate(rows, 2 * n)
    # back substitution
    for c in range(n - 1, -1, -1):
        piv = rows[c][c]
        for j in range(n, 2 * n):
            rows[c][j] = rows[c][j] / piv
        for r in range(c - 1, -1, -1):
            factor = rows[r][c]
            if factor.lo == 0.0 and factor.hi == 0.0:
                continue
            for j in range(n, 2 * n):
                rows[r][j] = rows[r][j] - factor * rows[c][j]
    lo = np.array([[rows[i][n + j].lo for j in range(n)] for i in range(n)])
    hi = np.array([[rows[i][n + j].hi for j in range(n)] for i in range(n)])
    return IMatrix(lo, hi)


def det_sign(M: IMatrix) -> int:
    """Sign of the determinant, certified via an interval LU factorization.

    Returns +1 or -1 only when every pivot interval excludes 0 (so the
    determinant enclosure excludes 0); raises IndeterminateSignError or
    SingularMatrixError otherwise.
    """
    n, m = M.shape
    if n != m:
        raise DomainError("det_sign needs a square matrix")
    rows = [[M.entry(i, j) for j in range(n)] for i in range(n)]
    try:
        pivots, parity = _gauss_eliminate(rows, n)
    except SingularMatrixError as e:
        raise IndeterminateSignError(str(e)) from e
    sign = parity
    for p in pivots:
        sign = sign if p.lo > 0.0 else -sign
    return sign
