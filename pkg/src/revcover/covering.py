"""Rigorous verification of covering and backcovering relations.

A relation N =(map^k)=> M is certified by three ingredients:

  * degree: the unstable block A of the chart derivative at the source center
    must have a determinant enclosure of certified sign w;
  * exit condition: every cell of a grid covering the exit wall (boundary of
    the unstable cube times the stable cube) maps, hulled with the linear
    image used by the convex homotopy, strictly clear of the target's
    unstable cube in some unstable coordinate;
  * entry condition: every cell of a grid covering the full chart boundary
    maps strictly inside the target's open stable cube.

Failing cells are bisected along their widest coordinate up to a depth cap,
within a per-subtree box budget. Only the convex homotopy between the chart
map and its linearization is certified, so a failed run is "inconclusive",
never a disproof; "refuted-cell" means a cell's whole enclosure provably
violates the checked condition, so this certification strategy can never
succeed for the given h-sets.

The per-relation box budget is apportioned evenly over the initial grid
cells and each cell's refinement subtree is processed in a fixed order, so
verdicts and statistics are identical for every thread count.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .dynamics import MapSystem, OrbitSegment, iterate, map_from_spec
from .hset import HSet, _facet_cells_arrays, transpose
from .interval import (
    DomainError,
    IBox,
    IMatrix,
    IndeterminateSignError,
    SingularMatrixError,
    det_sign,
    imat_mul,
    imat_vec_batch,
    imatmul_batch,
    imatvec_cellwise,
    affine_batch,
    iadd,
    isub,
)

VERIFIED = "verified"
REFUTED = "refuted-cell"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class VerifyConfig:
    """Knobs for one relation verification.

    resolution: initial subdivisions per free chart coordinate of each facet.
    max_depth: bisection depth cap for failing cells.
    threads: worker processes for cell verification (verdict-invariant).
    budget: per-relation box budget, apportioned over initial cells.
    fixed_grid: disable bisection; the initial uniform grid must decide.
    mean_value: evaluate cells in centered form (point image plus interval
        Jacobian times radius) instead of plain stepwise composition.
    """

    resolution: int = 2
    max_depth: int = 40
    threads: int = 1
    budget: int = 20_000_000
    fixed_grid: bool = False
    mean_value: bool = False
    batch_size: int = 8192

    def __post_init__(self):
        if self.max_depth < 0 or self.budget <= 0 or self.resolution < 1:
            raise DomainError("invalid verification config")


@dataclass
class CheckStats:
    boxes: int = 0
    max_depth: int = 0
    refuted_cells: int = 0
    exhausted_subtrees: int = 0
    wall_time: float = 0.0


@dataclass
class CheckResult:
    verdict: str
    stats: CheckStats
    worst_cell: Optional[dict] = None


@dataclass
class DegreeData:
    """Unstable block of the chart derivative at the source center, its
    certified determinant sign, and the center orbit it was built from."""

    A: IMatrix
    w: int
    center_orbit: OrbitSegment
    chart_derivative: IMatrix


@dataclass
class CoveringCertificate:
    source: str
    target: str
    map_name: str
    iters: int
    direction: str  # "direct" | "back" | "derived-by-symmetry"
    w: Optional[int]
    status: str
    boxes: int = 0
    max_depth: int = 0
    wall_time: float = 0.0
    checks: dict = field(default_factory=dict)
    config: Optional[dict] = None
    failure: Optional[str] = None

    @property
    def verified(self) -> bool:
        return self.status == VERIFIED

    def to_dict(self) -> dict:
        d = {
            "schema": "revcover-certificate/1",
            "source": self.source,
            "target": self.target,
            "map": self.map_name,
            "iters": self.iters,
            "direction": self.direction,
            "w": self.w,
            "status": self.status,
            "boxes": self.boxes,
            "max_depth": self.max_depth,
            "wall_time_s": round(self.wall_time, 6),
            "checks": self.checks,
            "config": self.config,
        }
        if self.failure:
            d["failure"] = self.failure
        return d

    @staticmethod
    def from_dict(d: dict) -> "CoveringCertificate":
        return CoveringCertificate(
            source=d["source"],
            target=d["target"],
            map_name=d["map"],
            iters=d["iters"],
            direction=d["direction"],
            w=d["w"],
            status=d["status"],
            boxes=d.get("boxes", 0),
            max_depth=d.get("max_depth", 0),
            wall_time=d.get("wall_time_s", 0.0),
            checks=d.get("checks", {}),
            config=d.get("config"),
            failure=d.get("failure"),
        )


def compute_degree(N: HSet, mapsys: MapSystem, k: int, M: HSet) -> DegreeData:
    """Chart derivative at the source center and its certified degree.

    The derivative of c_M o map^k o c_N^{-1} at chart zero is the interval
    chain product inv(M_M) . Dmap(z_{k-1}) ... Dmap(z_0) . M_N along the
    center orbit; the degree is the determinant sign of its u x u block.
    """
    if N.u != M.u or N.s != M.s:
        raise DomainError("covering requires matching unstable/stable dimensions")
    orbit = iterate(mapsys, k, IBox.point(N.center), with_jacobians=True)
    if orbit.blowup_at is not None:
        raise DomainError(f"center orbit left the representable range at step {orbit.blowup_at}")
    chain = orbit.derivative_product()
    dfc0 = imat_mul(imat_mul(M.inv_matrix, chain), IMatrix.from_point(N.matrix))
    u = N.u
    if u == 0:
        # no unstable directions: the linear model is trivial and w = +1
        return DegreeData(IMatrix(np.zeros((0, 0)), np.zeros((0, 0))), 1, orbit, dfc0)
    A = IMatrix(dfc0.lo[:u, :u], dfc0.hi[:u, :u])
    w = det_sign(A)
    return DegreeData(A, w, orbit, dfc0)


class _CellEngine:
    """Batch evaluator for the exit/entry conditions of one relation."""

    def __init__(self, mapsys, k, src_matrix, src_center, inv_lo, inv_hi, tgt_center,
                 dfc0_lo, dfc0_hi, u, which, mean_value):
        self.mapsys = mapsys
        self.k = k
        self.src_matrix = src_matrix
        self.src_center = src_center
        self.inv_lo = inv_lo
        self.inv_hi = inv_hi
        self.tgt_center = tgt_center
        self.dfc0_lo = dfc0_lo
        self.dfc0_hi = dfc0_hi
        self.u = u
        self.which = which
        self.mean_value = mean_value

    def _chart_image(self, lo, hi):
        """Enclosure of the chart map over each cell, (B, n) lo/hi."""
        if not self.mean_value:
            vlo, vhi = affine_batch(self.src_matrix, self.src_center, lo, hi)
            for _ in range(self.k):
                vlo, vhi = self.mapsys.eval_batch(vlo, vhi)
            dlo, dhi = isub(vlo, vhi, self.tgt_center[None, :], self.tgt_center[None, :])
            return imat_vec_batch(self.inv_lo, self.inv_hi, dlo, dhi)

        nb, n = lo.shape
        mid = 0.5 * (lo + hi)
        vlo, vhi = affine_batch(self.src_matrix, self.src_center, mid, mid)
        blo, bhi = affine_batch(self.src_matrix, self.src_center, lo, hi)
        jlo = np.broadcast_to(self.src_matrix, (nb, n, n)).copy()
        jhi = jlo.copy()
        for _ in range(self.k):
            glo, ghi = self.mapsys.jac_batch(blo, bhi)
            jlo, jhi = imatmul_batch(glo, ghi, jlo, jhi)
            blo, bhi = self.mapsys.eval_batch(blo, bhi)
            vlo, vhi = self.mapsys.eval_batch(vlo, vhi)
        tlo, thi = imatmul_batch(
            np.broadcast_to(self.inv_lo, (nb, n, n)),
            np.broadcast_to(self.inv_hi, (nb, n, n)),
            jlo,
            jhi,
        )
        dlo, dhi = isub(vlo, vhi, self.tgt_center[None, :], self.tgt_center[None, :])
        plo, phi = imat_vec_batch(self.inv_lo, self.inv_hi, dlo, dhi)
        rlo, rhi = isub(lo, hi, mid, mid)
        clo, chi = imatvec_cellwise(tlo, thi, rlo, rhi)
        return iadd(plo, phi, clo, chi)

    def classify(self, lo, hi):
        """Returns (passed, refuted) boolean masks for a batch of chart cells.

        Enclosures that overflow or degrade to NaN simply fail both masks and
        are refined like any other failing cell.
        """
        with np.errstate(over="ignore", invalid="ignore"):
            return self._classify(lo, hi)

    def _classify(self, lo, hi):
        clo, chi = self._chart_image(lo, hi)
        u = self.u
        if self.which == "exit":
            ulo = lo.copy()
            uhi = hi.copy()
            ulo[:, u:] = 0.0
            uhi[:, u:] = 0.0
            lxlo, lxhi = imat_vec_batch(self.dfc0_lo, self.dfc0_hi, ulo, uhi)
            zlo = np.minimum(clo, lxlo)
            zhi = np.maximum(chi, lxhi)
            passed = np.zeros(len(lo), dtype=bool)
            for i in range(u):
                passed |= (zlo[:, i] > 1.0) | (zhi[:, i] < -1.0)
            # the plain image landing strictly inside the open target cube
            # violates the homotopy's t=0 condition for every cell point
            refuted = np.ones(len(lo), dtype=bool)
            for i in range(lo.shape[1]):
                refuted &= (clo[:, i] > -1.0) & (chi[:, i] < 1.0)
        else:
            passed = np.ones(len(lo), dtype=bool)
            refuted = np.zeros(len(lo), dtype=bool)
            for i in range(u, lo.shape[1]):
                passed &= (clo[:, i] > -1.0) & (chi[:, i] < 1.0)
                refuted |= (clo[:, i] >= 1.0) | (chi[:, i] <= -1.0)
        return passed, refuted & ~passed


def _bisect_cells(lo, hi, depth):
    w = hi - lo
    ax = np.argmax(w, axis=1)
    r = np.arange(len(lo))
    mid = 0.5 * (lo[r, ax] + hi[r, ax])
    left_hi = hi.copy()
    left_hi[r, ax] = mid
    right_lo = lo.copy()
    right_lo[r, ax] = mid
    return (
        np.concatenate([lo, right_lo]),
        np.concatenate([left_hi, hi]),
        np.concatenate([depth + 1, depth + 1]),
    )


def _cell_record(root, depth, lo, hi, which):
    return {
        "root": int(root),
        "depth": int(depth),
        "chart_lo": [float(x) for x in lo],
        "chart_hi": [float(x) for x in hi],
        "check": which,
    }


def _refine_root(engine, root_id, lo0, hi0, allowance, max_depth, batch_size, which):
    """Drive one failing initial cell's subtree to completion (fixed order)."""
    boxes = 0
    maxd = 0
    status = "ok"
    worst = None
    if max_depth < 1:
        return boxes, 0, "exhausted", _cell_record(root_id, 0, lo0, hi0, which)
    lo, hi, depth = _bisect_cells(lo0[None, :], hi0[None, :], np.zeros(1, dtype=np.int32))
    frontier = [(lo, hi, depth)]
    while frontier:
        lo, hi, depth = frontier.pop()
        if len(lo) > batch_size:
            frontier.append((lo[batch_size:], hi[batch_size:], depth[batch_size:]))
            lo, hi, depth = lo[:batch_size], hi[:batch_size], depth[:batch_size]
        if boxes + len(lo) > allowance:
            take = allowance - boxes
            status = "exhausted"
            worst = _cell_record(root_id, depth[take] if take < len(lo) else depth[-1],
                                 lo[min(take, len(lo) - 1)], hi[min(take, len(lo) - 1)], which)
            lo, hi, depth = lo[:take], hi[:take], depth[:take]
            frontier = []
            if len(lo) == 0:
                break
        boxes += len(lo)
        maxd = max(maxd, int(depth.max()))
        passed, refuted = engine.classify(lo, hi)
        if refuted.any():
            i = int(np.argmax(refuted))
            return boxes, maxd, "refuted", _cell_record(root_id, depth[i], lo[i], hi[i], which)
        if status == "exhausted":
            continue
        failing = ~passed
        if not failing.any():
            continue
        flo, fhi, fdepth = lo[failing], hi[failing], depth[failing]
        capped = fdepth >= max_depth
        if capped.any():
            i = int(np.argmax(capped))
            return boxes, maxd, "exhausted", _cell_record(
                root_id, fdepth[i], flo[i], fhi[i], which
            )
        frontier.append(_bisect_cells(flo, fhi, fdepth))
    return boxes, maxd, status, worst


def _worker_refine(payload: dict) -> dict:
    """Top-level worker: processes complete refinement subtrees for a set of
    failing initial cells. Pure function of its payload."""
    mapsys = map_from_spec(payload["mapspec"])
    engine = _CellEngine(
        mapsys,
        payload["k"],
        payload["src_matrix"],
        payload["src_center"],
        payload["inv_lo"],
        payload["inv_hi"],
        payload["tgt_center"],
        payload["dfc0_lo"],
        payload["dfc0_hi"],
        payload["u"],
        payload["which"],
        payload["mean_value"],
    )
    out = {"boxes": 0, "max_depth": 0, "refuted": [], "exhausted": [], "worst": {}}
    for root_id, lo0, hi0 in payload["roots"]:
        boxes, maxd, status, worst = _refine_root(
            engine,
            root_id,
            lo0,
            hi0,
            payload["allowance"],
            payload["max_depth"],
            payload["batch_size"],
            payload["which"],
        )
        out["boxes"] += boxes
        out["max_depth"] = max(out["max_depth"], maxd)
        if status == "refuted":
            out["refuted"].append(root_id)
            out["worst"][root_id] = worst
        elif status == "exhausted":
            out["exhausted"].append(root_id)
            out["worst"][root_id] = worst
    return out


def _run_check(N: HSet, mapsys: MapSystem, k: int, M: HSet, cfg: VerifyConfig,
               which: str, degree: DegreeData) -> CheckResult:
    t0 = time.perf_counter()
    axes = range(N.u) if which == "exit" else range(N.dim)
    lo0, hi0, _tags = _facet_cells_arrays(N.dim, axes, cfg.resolution)
    n_roots = len(lo0)
    allowance = max(1, cfg.budget // n_roots)
    engine = _CellEngine(
        mapsys, k, np.asarray(N.matrix), np.asarray(N.center),
        M.inv_matrix.lo, M.inv_matrix.hi, np.asarray(M.center),
        degree.chart_derivative.lo, degree.chart_derivative.hi,
        N.u, which, cfg.mean_value,
    )
    stats = CheckStats()
    worst_cells: dict[int, dict] = {}
    refuted_roots: list[int] = []
    exhausted_roots: list[int] = []

    # stage 1: every initial cell exactly once, in large batches
    failing_roots = []
    for start in range(0, n_roots, cfg.batch_size):
        sl = slice(start, min(start + cfg.batch_size, n_roots))
        passed, refuted = engine.classify(lo0[sl], hi0[sl])
        stats.boxes += sl.stop - sl.start
        for i in np.nonzero(refuted)[0]:
            rid = start + int(i)
            refuted_roots.append(rid)
            worst_cells[rid] = _cell_record(rid, 0, lo0[rid], hi0[rid], which)
        for i in np.nonzero(~passed & ~refuted)[0]:
            failing_roots.append(start + int(i))

    # stage 2: refine failing subtrees (unless the grid is fixed)
    if failing_roots and not cfg.fixed_grid:
        payload_base = {
            "mapspec": mapsys.spec,
            "k": k,
            "src_matrix": np.asarray(N.matrix),
            "src_center": np.asarray(N.center),
            "inv_lo": M.inv_matrix.lo,
            "inv_hi": M.inv_matrix.hi,
            "tgt_center": np.asarray(M.center),
            "dfc0_lo": degree.chart_derivative.lo,
            "dfc0_hi": degree.chart_derivative.hi,
            "u": N.u,
            "which": which,
            "mean_value": cfg.mean_value,
            "allowance": allowance - 1,  # the root itself was already counted
            "max_depth": cfg.max_depth,
            "batch_size": cfg.batch_size,
        }
        roots = [(rid, lo0[rid], hi0[rid]) for rid in failing_roots]
        nworkers = max(1, cfg.threads)
        if nworkers > 1 and mapsys.spec is None:
            nworkers = 1  # map not reconstructible in a worker process
        if nworkers == 1 or len(roots) == 1:
            results = [_worker_refine({**payload_base, "roots": roots})]
        else:
            chunks = [roots[i::nworkers] for i in range(nworkers)]
            chunks = [c for c in chunks if c]
            with ProcessPoolExecutor(max_workers=len(chunks)) as ex:
                results = list(ex.map(_worker_refine, [{**payload_base, "roots": c} for c in chunks]))
        for r in results:
            stats.boxes += r["boxes"]
            stats.max_depth = max(stats.max_depth, r["max_depth"])
            refuted_roots.extend(r["refuted"])
            exhausted_roots.extend(r["exhausted"])
            worst_cells.update(r["worst"])
    elif failing_roots:
        exhausted_roots.extend(failing_roots)
        for rid in failing_roots:
            worst_cells[rid] = _cell_record(rid, 0, lo0[rid], hi0[rid], which)

    stats.refuted_cells = len(refuted_roots)
    stats.exhausted_subtrees = len(exhausted_roots)
    stats.wall_time = time.perf_counter() - t0
    if refuted_roots:
        verdict = REFUTED
        worst = worst_cells[min(refuted_roots)]
    elif exhausted_roots:
        verdict = INCONCLUSIVE
        worst = worst_cells[min(exhausted_roots)]
    else:
        verdict = VERIFIED
        worst = None
    return CheckResult(verdict, stats, worst)


def check_exit_condition(N: HSet, mapsys: MapSystem, k: int, M: HSet,
                         cfg: VerifyConfig, degree: Optional[DegreeData] = None) -> CheckResult:
    """Certify that the exit wall maps clear of the target's unstable cube.

    Each cell's image is hulled with the linear image of its unstable part
    (the convex homotopy endpoint) before the test; success implies the
    homotopy never meets the target chart cube on the exit wall.
    """
    if degree is None:
        degree = compute_degree(N, mapsys, k, M)
    if N.u == 0:
        return CheckResult(VERIFIED, CheckStats())
    return _run_check(N, mapsys, k, M, cfg, "exit", degree)


def check_entry_condition(N: HSet, mapsys: MapSystem, k: int, M: HSet,
                          cfg: VerifyConfig, degree: Optional[DegreeData] = None) -> CheckResult:
    """Certify that the chart boundary maps strictly inside the target's open
    stable cube. Requires the chart map to be a diffeomorphism onto its image
    (true for the shipped map and invertible affine toys); the interior then
    stays clear of the target's entry wall."""
    if degree is None:
        degree = compute_degree(N, mapsys, k, M)
    if N.s == 0:
        return CheckResult(VERIFIED, CheckStats())
    return _run_check(N, mapsys, k, M, cfg, "entry", degree)


def verify_cover(N: HSet, mapsys: MapSystem, k: int, M: HSet,
                 cfg: Optional[VerifyConfig] = None) -> CoveringCertificate:
    """Full certificate for N =(map^k)=> M with the convex linear homotopy."""
    cfg = cfg or VerifyConfig()
    t0 = time.perf_counter()
    cert = CoveringCertificate(
        source=N.name, target=M.name, map_name=mapsys.name, iters=k,
        direction="direct", w=None, status=INCONCLUSIVE,
        config=asdict(cfg),
    )
    try:
        degree = compute_degree(N, mapsys, k, M)
    except (IndeterminateSignError, SingularMatrixError, DomainError) as e:
        cert.failure = f"degree computation failed: {e}"
        cert.wall_time = time.perf_counter() - t0
        return cert
    cert.w = degree.w
    exit_res = check_exit_condition(N, mapsys, k, M, cfg, degree)
    entry_res = check_entry_condition(N, mapsys, k, M, cfg, degree)
    for name, res in (("exit", exit_res), ("entry", entry_res)):
        cert.checks[name] = {
            "verdict": res.verdict,
            "boxes": res.stats.boxes,
            "max_depth": res.stats.max_depth,
            "refuted_cells": res.stats.refuted_cells,
            "exhausted_subtrees": res.stats.exhausted_subtrees,
            "wall_time_s": round(res.stats.wall_time, 6),
            "worst_cell": res.worst_cell,
        }
    cert.boxes = exit_res.stats.boxes + entry_res.stats.boxes
    cert.max_depth = max(exit_res.stats.max_depth, entry_res.stats.max_depth)
    if exit_res.verdict == REFUTED or entry_res.verdict == REFUTED:
        cert.status = REFUTED
    elif exit_res.verdict == VERIFIED and entry_res.verdict == VERIFIED:
        cert.status = VERIFIED
    else:
        cert.status = INCONCLUSIVE
    cert.wall_time = time.perf_counter() - t0
    return cert


def verify_backcover(N: HSet, mapsys: MapSystem, k: int, M: HSet,
                     cfg: Optional[VerifyConfig] = None) -> CoveringCertificate:
    """Certificate for the backcovering N =(map^-k)=> M, i.e. the direct
    covering of the transposed targets under the inverse map."""
    inv = mapsys.require_inverse()
    inner = verify_cover(transpose(M), inv, k, transpose(N), cfg)
    cert = CoveringCertificate(
        source=N.name, target=M.name, map_name=mapsys.name, iters=k,
        direction="back", w=inner.w, status=inner.status,
        boxes=inner.boxes, max_depth=inner.max_depth, wall_time=inner.wall_time,
        checks=inner.checks, config=inner.config, failure=inner.failure,
    )
    cert.checks = dict(inner.checks)
    cert.checks["transposed_equivalent"] = {
        "source": inner.source,
        "target": inner.target,
        "map": inv.name,
    }
    return cert
