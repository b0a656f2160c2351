"""The concrete reversible map family and the MapSystem abstraction.

The shipped instance is the 4-d map

    F(x, y) = (-y + g(x+y), x + g(x+y)),      g = f/2,
    f(w1, w2) = (w1(1-w1) + 4 - w2,  w2(1-w2) + 4 + w1),

with reversing symmetry S(x1, x2, y1, y2) = (-x1, -x2, y1, y2), so that
S o F o S o F = Id. The inverse is closed form: with (X, Y) = F(x, y) one has
x + y = Y - X, hence x = Y - g(Y-X) and y = g(Y-X) - X.

All evaluators come in three flavors: float point, rigorous IBox, and a
vectorized batch form over (B, n) lo/hi arrays used by the covering sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .hset import LinearReversor, coordinate_reflection
from .interval import (
    IBox,
    IMatrix,
    affine_batch,
    iadd,
    imul,
    isub,
)


class MissingInverseError(Exception):
    """The operation needs an inverse evaluator that this map does not provide."""


@dataclass
class MapSystem:
    """Evaluatable map with derivative and optional closed-form inverse.

    `spec` is a small picklable description used to rebuild the map inside
    worker processes; maps constructed from ad-hoc closures leave it None and
    are then verified single-threaded.
    """

    name: str
    dim: int
    eval_point: Callable[[np.ndarray], np.ndarray]
    eval_batch: Callable  # (lo, hi) -> (lo, hi), arrays (B, dim)
    jac_batch: Callable  # (lo, hi) -> (Jlo, Jhi), arrays (B, dim, dim)
    inverse: Optional["MapSystem"] = None
    reversor: Optional[LinearReversor] = None
    spec: Optional[tuple] = None

    def eval_box(self, b: IBox) -> IBox:
        lo, hi = self.eval_batch(b.lo[None, :], b.hi[None, :])
        return IBox(lo[0], hi[0])

    def jac_box(self, b: IBox) -> IMatrix:
        jl, jh = self.jac_batch(b.lo[None, :], b.hi[None, :])
        return IMatrix(jl[0], jh[0])

    def require_inverse(self) -> "MapSystem":
        if self.inverse is None:
            raise MissingInverseError(f"map {self.name!r} has no inverse evaluator")
        return self.inverse


# --- the planar quadratic generator f ---

def f_eval(b: IBox) -> IBox:
    """Rigorous enclosure of f on a 2-d box."""
    lo, hi = _f_batch(b.lo[None, :], b.hi[None, :])
    return IBox(lo[0], hi[0])


def f_point(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    return np.array([w[0] * (1 - w[0]) + 4 - w[1], w[1] * (1 - w[1]) + 4 + w[0]])


def _f_batch(lo, hi):
    w1l, w1h = lo[:, 0], hi[:, 0]
    w2l, w2h = lo[:, 1], hi[:, 1]
    a1l, a1h = isub(1.0, 1.0, w1l, w1h)
    t1l, t1h = imul(w1l, w1h, a1l, a1h)
    f1l, f1h = iadd(t1l, t1h, 4.0, 4.0)
    f1l, f1h = isub(f1l, f1h, w2l, w2h)
    a2l, a2h = isub(1.0, 1.0, w2l, w2h)
    t2l, t2h = imul(w2l, w2h, a2l, a2h)
    f2l, f2h = iadd(t2l, t2h, 4.0, 4.0)
    f2l, f2h = iadd(f2l, f2h, w1l, w1h)
    return np.stack([f1l, f2l], axis=1), np.stack([f1h, f2h], axis=1)


# --- the 4-d reversible map F and its closed-form inverse ---

def F_point(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    g = 0.5 * f_point(z[:2] + z[2:])
    return np.concatenate([-z[2:] + g, z[:2] + g])


def F_inverse_point(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    g = 0.5 * f_point(z[2:] - z[:2])
    return np.concatenate([z[2:] - g, g - z[:2]])


def _F_batch(lo, hi):
    w_lo, w_hi = iadd(lo[:, :2], hi[:, :2], lo[:, 2:], hi[:, 2:])
    fl, fh = _f_batch(w_lo, w_hi)
    gl, gh = 0.5 * fl, 0.5 * fh  # scaling by 0.5 is exact
    out_lo = np.empty_like(lo)
    out_hi = np.empty_like(hi)
    out_lo[:, :2], out_hi[:, :2] = isub(gl, gh, lo[:, 2:], hi[:, 2:])
    out_lo[:, 2:], out_hi[:, 2:] = iadd(gl, gh, lo[:, :2], hi[:, :2])
    return out_lo, out_hi


def _F_inverse_batch(lo, hi):
    w_lo, w_hi = isub(lo[:, 2:], hi[:, 2:], lo[:, :2], hi[:, :2])
    fl, fh = _f_batch(w_lo, w_hi)
    gl, gh = 0.5 * fl, 0.5 * fh
    out_lo = np.empty_like(lo)
    out_hi = np.empty_like(hi)
    out_lo[:, :2], out_hi[:, :2] = isub(lo[:, 2:], hi[:, 2:], gl, gh)
    out_lo[:, 2:], out_hi[:, 2:] = isub(gl, gh, lo[:, :2], hi[:, :2])
    return out_lo, out_hi


def _dg_entries(w_lo, w_hi):
    # Dg = [[1/2 - w1, -1/2], [1/2, 1/2 - w2]], evaluated on interval w
    a11l, a11h = isub(0.5, 0.5, w_lo[:, 0], w_hi[:, 0])
    a22l, a22h = isub(0.5, 0.5, w_lo[:, 1], w_hi[:, 1])
    return a11l, a11h, a22l, a22h


def _F_jac_batch(lo, hi):
    """DF = [[Dg, Dg - I], [I + Dg, Dg]] with Dg at w = x + y."""
    nb = lo.shape[0]
    w_lo, w_hi = iadd(lo[:, :2], hi[:, :2], lo[:, 2:], hi[:, 2:])
    a11l, a11h, a22l, a22h = _dg_entries(w_lo, w_hi)
    jl = np.empty((nb, 4, 4))
    jh = np.empty((nb, 4, 4))
    half = 0.5
    m11l, m11h = iadd(a11l, a11h, -1.0, -1.0)
    m22l, m22h = iadd(a22l, a22h, -1.0, -1.0)
    p11l, p11h = iadd(a11l, a11h, 1.0, 1.0)
    p22l, p22h = iadd(a22l, a22h, 1.0, 1.0)
    jl[:, 0], jh[:, 0] = _rows((a11l, -half, m11l, -half), (a11h, -half, m11h, -half), nb)
    jl[:, 1], jh[:, 1] = _rows((half, a22l, half, m22l), (half, a22h, half, m22h), nb)
    jl[:, 2], jh[:, 2] = _rows((p11l, -half, a11l, -half), (p11h, -half, a11h, -half), nb)
    jl[:, 3], jh[:, 3] = _rows((half, p22l, half, a22l), (half, p22h, half, a22h), nb)
    return jl, jh


def _F_inverse_jac_batch(lo, hi):
    """D(F^{-1}) = [[Dg, I - Dg], [-(I + Dg), Dg]] with Dg at w = Y - X."""
    nb = lo.shape[0]
    w_lo, w_hi = isub(lo[:, 2:], hi[:, 2:], lo[:, :2], hi[:, :2])
    a11l, a11h, a22l, a22h = _dg_entries(w_lo, w_hi)
    jl = np.empty((nb, 4, 4))
    jh = np.empty((nb, 4, 4))
    half = 0.5
    # 1 - a and -1 - a, outward rounded
    i11l, i11h = isub(1.0, 1.0, a11l, a11h)
    i22l, i22h = isub(1.0, 1.0, a22l, a22h)
    n11l, n11h = isub(-1.0, -1.0, a11l, a11h)
    n22l, n22h = isub(-1.0, -1.0, a22l, a22h)
    jl[:, 0], jh[:, 0] = _rows((a11l, -half, i11l, half), (a11h, -half, i11h, half), nb)
    jl[:, 1], jh[:, 1] = _rows((half, a22l, -half, i22l), (half, a22h, -half, i22h), nb)
    jl[:, 2], jh[:, 2] = _rows((n11l, half, a11l, -half), (n11h, half, a11h, -half), nb)
    jl[:, 3], jh[:, 3] = _rows((-half, n22l, half, a22l), (-half, n22h, half, a22h), nb)
    return jl, jh


def _rows(los, his, nb):
    lo = np.empty((nb, len(los)))
    hi = np.empty((nb, len(his)))
    for j, (l, h) in enumerate(zip(los, his)):
        lo[:, j] = l
        hi[:, j] = h
    return lo, hi


def reversible_quadratic_map() -> MapSystem:
    """The shipped 4-d reversible instance, registered as "F-quadratic-4d"."""
    reversor = coordinate_reflection(4, (0, 1))
    fwd = MapSystem(
        name="F-quadratic-4d",
        dim=4,
        eval_point=F_point,
        eval_batch=_F_batch,
        jac_batch=_F_jac_batch,
        reversor=reversor,
        spec=("F-quadratic-4d",),
    )
    inv = MapSystem(
        name="F-quadratic-4d-inverse",
        dim=4,
        eval_point=F_inverse_point,
        eval_batch=_F_inverse_batch,
        jac_batch=_F_inverse_jac_batch,
        reversor=reversor,
        spec=("F-quadratic-4d-inverse",),
    )
    fwd.inverse = inv
    inv.inverse = fwd
    return fwd


def F_eval(b: IBox) -> IBox:
    return reversible_quadratic_map().eval_box(b)


def F_inverse(b: IBox) -> IBox:
    return reversible_quadratic_map().require_inverse().eval_box(b)


def F_derivative(b: IBox) -> IMatrix:
    return reversible_quadratic_map().jac_box(b)


def _linear_only(A: np.ndarray, name: str, reversor, spec) -> MapSystem:
    n = A.shape[0]

    def _eval_point(z):
        return A @ np.asarray(z, dtype=float)

    def _eval_batch(lo, hi):
        return affine_batch(A, np.zeros(n), lo, hi)

    def _jac_batch(lo, hi):
        j = np.broadcast_to(A, (lo.shape[0], n, n))
        return j.copy(), j.copy()

    return MapSystem(
        name=name,
        dim=n,
        eval_point=_eval_point,
        eval_batch=_eval_batch,
        jac_batch=_jac_batch,
        reversor=reversor,
        spec=spec,
    )


def linear_map_system(matrix, inverse_matrix=None, name="linear", reversor=None) -> MapSystem:
    """MapSystem for z -> A z; mainly for toy coverings and tests."""
    A = np.asarray(matrix, dtype=float)
    inv = None if inverse_matrix is None else np.asarray(inverse_matrix, dtype=float)
    spec_inv = None if inv is None else inv.tolist()
    m = _linear_only(A, name, reversor, ("linear", A.tolist(), spec_inv))
    if inv is not None:
        m.inverse = _linear_only(inv, name + "-inverse", None, ("linear", spec_inv, A.tolist()))
        m.inverse.inverse = m
    return m


_REGISTRY = {
    "F": reversible_quadratic_map,
    "F-quadratic-4d": reversible_quadratic_map,
}


def map_by_name(name: str) -> MapSystem:
    if name in ("F-quadratic-4d-inverse", "F-inverse"):
        return reversible_quadratic_map().require_inverse()
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise KeyError(f"unknown map {name!r}; known: {sorted(_REGISTRY)}")


def map_from_spec(spec: tuple) -> MapSystem:
    """Rebuild a MapSystem from its picklable spec (worker-process side)."""
    if spec[0] in ("F-quadratic-4d", "F-quadratic-4d-inverse", "F", "F-inverse"):
        return map_by_name(spec[0])
    if spec[0] == "linear":
        return linear_map_system(spec[1], spec[2])
    raise KeyError(f"cannot rebuild map from spec {spec!r}")


@dataclass
class OrbitSegment:
    """Stepwise interval orbit x0 .. xk with optional per-step Jacobians.

    blowup_at records the first step whose enclosure left the representable
    range; verification treats such cells as failures rather than aborting.
    """

    map_name: str
    boxes: list  # IBox, length k+1 (shorter when a blowup truncates it)
    jacobians: Optional[list] = None  # IMatrix per executed step
    blowup_at: Optional[int] = None

    @property
    def k(self) -> int:
        return len(self.boxes) - 1

    def final(self) -> IBox:
        return self.boxes[-1]

    def derivative_product(self) -> IMatrix:
        """Chain-rule enclosure of D(map^k) along the stored orbit."""
        if not self.jacobians:
            raise ValueError("orbit was computed without Jacobians")
        from .interval import imat_mul

        acc = self.jacobians[0]
        for j in self.jacobians[1:]:
            acc = imat_mul(j, acc)
        return acc


def iterate(mapsys: MapSystem, k: int, z, with_jacobians: bool = False) -> OrbitSegment:
    """k-fold stepwise interval composition, keeping every intermediate box."""
    if k < 1:
        raise ValueError("iterate needs k >= 1")
    box = z if isinstance(z, IBox) else IBox.point(z)
    boxes = [box]
    jacs = [] if with_jacobians else None
    blowup = None
    # overflow to infinite bounds is sound and handled, not a warning
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(k):
            if with_jacobians:
                jacs.append(mapsys.jac_box(box))
            nxt = mapsys.eval_batch(box.lo[None, :], box.hi[None, :])
            lo, hi = nxt[0][0], nxt[1][0]
            if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
                blowup = step + 1
                break
            box = IBox(lo, hi)
            boxes.append(box)
    return OrbitSegment(mapsys.name, boxes, jacs, blowup)


def reversibility_residual(mapsys: MapSystem, z) -> float:
    """Float max-norm of (S o F o S o F)(z) - z; diagnostic only."""
    if mapsys.reversor is None:
        raise ValueError("map has no reversor")
    S = mapsys.reversor.apply
    z = np.asarray(z, dtype=float)
    w = S(mapsys.eval_point(S(mapsys.eval_point(z))))
    return float(np.max(np.abs(w - z)))


def reversibility_encloses_identity(mapsys: MapSystem, b: IBox) -> bool:
    """Interval variant: the enclosure of (S o F o S o F)(b) contains b."""
    if mapsys.reversor is None:
        raise ValueError("map has no reversor")
    img = mapsys.reversor.apply_box(mapsys.eval_box(mapsys.reversor.apply_box(mapsys.eval_box(b))))
    return img.contains_box(b)


def fixed_point_equations_residual(P) -> tuple[float, float]:
    """Residuals of the two fixed-point equations at a symmetric point
    (x1 = x2 = 0): y1^2 + (y2+1)^2 = 9 and (y1+1)^2 - y2^2 = 1."""
    P = np.asarray(P, dtype=float)
    y1, y2 = P[2], P[3]
    return y1**2 + (y2 + 1) ** 2 - 9.0, (y1 + 1) ** 2 - y2**2 - 1.0
