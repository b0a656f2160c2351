"""Covering verification: degrees, boundary checks, toy oracles, determinism."""

import numpy as np
import pytest

from revcover.covering import (
    INCONCLUSIVE,
    REFUTED,
    VERIFIED,
    CoveringCertificate,
    VerifyConfig,
    check_entry_condition,
    check_exit_condition,
    compute_degree,
    verify_backcover,
    verify_cover,
)
from revcover.dynamics import linear_map_system, reversible_quadratic_map
from revcover.hset import HSet
from revcover.interval import DomainError

from conftest import float_sweep

MV = VerifyConfig(mean_value=True)


def toy_hset(n=2, u=1, name="T"):
    return HSet(name, np.zeros(n), np.eye(n), u, n - u)


def expansion_map(factors):
    A = np.diag(np.asarray(factors, dtype=float))
    return linear_map_system(A, np.linalg.inv(A), name="toy")


# --- degree ---

def test_degree_identity_map():
    N = toy_hset(4, 2)
    d = compute_degree(N, linear_map_system(np.eye(4)), 1, N)
    assert d.w == 1


def test_degree_orientation_flip():
    N = toy_hset(2, 1)
    assert compute_degree(N, expansion_map([3, 1 / 3]), 1, N).w == 1
    assert compute_degree(N, expansion_map([-3, 1 / 3]), 1, N).w == -1


def test_degree_requires_matching_dims():
    with pytest.raises(DomainError):
        compute_degree(toy_hset(2, 1), linear_map_system(np.eye(2)), 1, toy_hset(2, 2))


def test_instance_degrees(data):
    F = data.mapsys
    expected = {("N1", "N1", 1): 1, ("N2", "N2", 1): -1, ("N1", "H1", 1): 1,
                ("H1", "H2", 4): -1, ("H2", "H3", 1): -1, ("H3", "N2", 1): -1}
    for (a, b, k), w in expected.items():
        assert compute_degree(data.hset(a), F, k, data.hset(b)).w == w


# --- exit / entry checks on toys ---

def test_exit_linear_expansion_verified():
    N = toy_hset(2, 1)
    res = check_exit_condition(N, expansion_map([3, 1 / 3]), 1, N, VerifyConfig())
    assert res.verdict == VERIFIED


def test_exit_identity_inconclusive():
    N = toy_hset(2, 1)
    cfg = VerifyConfig(max_depth=8, budget=5000)
    res = check_exit_condition(N, linear_map_system(np.eye(2)), 1, N, cfg)
    assert res.verdict == INCONCLUSIVE
    assert res.worst_cell is not None


def test_entry_contraction_verified():
    N = toy_hset(2, 1)
    res = check_entry_condition(N, expansion_map([3, 1 / 3]), 1, N, VerifyConfig())
    assert res.verdict == VERIFIED


def test_entry_stable_expansion_refuted():
    N = toy_hset(2, 1)
    res = check_entry_condition(N, expansion_map([3, 2.0]), 1, N, VerifyConfig())
    assert res.verdict == REFUTED
    assert res.stats.refuted_cells >= 1


# --- full verification on toys (with the independent float oracle) ---

def test_verify_cover_toy_positive(rng):
    N = toy_hset(2, 1)
    m = expansion_map([3, 1 / 3])
    cert = verify_cover(N, m, 1, N, VerifyConfig())
    assert cert.verified and cert.w == 1
    exit_min, entry_max = float_sweep(N, m, 1, N, rng)
    assert exit_min > 1.0 and entry_max < 1.0


def test_verify_cover_toy_orientation(rng):
    N = toy_hset(2, 1)
    m = expansion_map([-3, 1 / 3])
    cert = verify_cover(N, m, 1, N, VerifyConfig())
    assert cert.verified and cert.w == -1
    exit_min, entry_max = float_sweep(N, m, 1, N, rng)
    assert exit_min > 1.0 and entry_max < 1.0


def test_verify_cover_identity_fails():
    N = toy_hset(2, 1)
    cert = verify_cover(N, linear_map_system(np.eye(2)), 1, N,
                        VerifyConfig(max_depth=8, budget=5000))
    assert not cert.verified
    assert cert.status in (INCONCLUSIVE, REFUTED)


def test_verify_cover_4d_toy():
    N = toy_hset(4, 2)
    m = expansion_map([2.5, -2.5, 0.2, 0.3])
    cert = verify_cover(N, m, 1, N, VerifyConfig())
    assert cert.verified and cert.w == -1


def test_verify_backcover_toy():
    """Backcovering of the expansion toy: the inverse contracts the formerly
    unstable direction, so the transposed relation verifies."""
    N = toy_hset(2, 1)
    m = expansion_map([3, 1 / 3])
    cert = verify_backcover(N, m, 1, N, VerifyConfig())
    assert cert.verified and cert.direction == "back" and cert.w == 1
    assert cert.checks["transposed_equivalent"]["map"] == "toy-inverse"


def test_verify_backcover_needs_inverse():
    from revcover.dynamics import MissingInverseError

    N = toy_hset(2, 1)
    with pytest.raises(MissingInverseError):
        verify_backcover(N, linear_map_system(np.diag([3.0, 1 / 3])), 1, N, VerifyConfig())


def test_pure_contraction_no_unstable():
    """u = 0: the exit set is empty, the image must land strictly inside."""
    N = HSet("C", np.zeros(2), np.eye(2), 0, 2)
    cert = verify_cover(N, expansion_map([0.3, 0.3]), 1, N, VerifyConfig())
    assert cert.verified and cert.w == 1
    cert = verify_cover(N, expansion_map([0.3, 2.0]), 1, N, VerifyConfig())
    assert not cert.verified


def test_pure_expansion_no_stable():
    """s = 0: there is no entry condition to check."""
    N = HSet("E", np.zeros(1), np.eye(1), 1, 0)
    cert = verify_cover(N, expansion_map([3.0]), 1, N, VerifyConfig())
    assert cert.verified and cert.w == 1


# --- instance relations ---

def test_instance_relation_mean_value(data):
    F = data.mapsys
    cert = verify_cover(data.hset("H1"), F, 4, data.hset("H2"), MV)
    assert cert.verified and cert.w == -1


def test_instance_relation_plain_mode(data):
    """Plain stepwise evaluation (the default mode) on the self-covering of
    the large h-set; this is the grid-method cost profile."""
    F = data.mapsys
    cert = verify_cover(data.hset("N2"), F, 1, data.hset("N2"),
                        VerifyConfig(mean_value=False, budget=2_000_000))
    assert cert.verified and cert.w == -1
    assert cert.boxes > 10_000  # plain mode pays a real grid cost


def test_instance_float_sweep_oracle(data, rng):
    """Necessary-condition spot check behind the verified certificates."""
    F = data.mapsys
    for (a, b, k) in (("N1", "N1", 1), ("H2", "H3", 1)):
        exit_min, entry_max = float_sweep(data.hset(a), F, k, data.hset(b), rng)
        assert exit_min > 1.0
        assert entry_max < 1.0


def test_verify_rejected_relation(data):
    """No covering from N1 straight into N2: the image is far away."""
    F = data.mapsys
    cert = verify_cover(data.hset("N1"), F, 1, data.hset("N2"),
                        VerifyConfig(mean_value=True, max_depth=6, budget=50_000))
    assert cert.status in (REFUTED, INCONCLUSIVE)


# --- refinement behavior, budget, determinism ---

def test_monotone_refinement(data):
    """Raising the depth cap does not change the verdict or the box count:
    passing cells are never refined."""
    F = data.mapsys
    c1 = verify_cover(data.hset("N1"), F, 1, data.hset("N1"),
                      VerifyConfig(mean_value=True, max_depth=20))
    c2 = verify_cover(data.hset("N1"), F, 1, data.hset("N1"),
                      VerifyConfig(mean_value=True, max_depth=21))
    assert c1.verified and c2.verified
    assert c1.boxes == c2.boxes and c1.max_depth == c2.max_depth


def test_passing_cell_children_pass(data):
    from revcover.covering import _CellEngine, _bisect_cells

    F = data.mapsys
    N = data.hset("N2")
    deg = compute_degree(N, F, 1, N)
    engine = _CellEngine(F, 1, N.matrix, N.center, N.inv_matrix.lo, N.inv_matrix.hi,
                         N.center, deg.chart_derivative.lo, deg.chart_derivative.hi,
                         N.u, "entry", True)
    lo = np.array([[1.0, -0.5, -0.5, -0.5]])
    hi = np.array([[1.0, 0.0, 0.0, 0.0]])
    passed, _ = engine.classify(lo, hi)
    if passed[0]:
        clo, chi, cd = _bisect_cells(lo, hi, np.zeros(1, dtype=np.int32))
        cpassed, _ = engine.classify(clo, chi)
        assert cpassed.all()


def test_budget_starvation_inconclusive():
    N = toy_hset(2, 1)
    cert = verify_cover(N, linear_map_system(np.eye(2)), 1, N,
                        VerifyConfig(budget=16, max_depth=30))
    assert cert.status == INCONCLUSIVE


def test_fixed_grid_mode(data):
    F = data.mapsys
    coarse = verify_cover(data.hset("N1"), F, 1, data.hset("N1"),
                          VerifyConfig(fixed_grid=True, resolution=1, mean_value=True))
    fine = verify_cover(data.hset("N1"), F, 1, data.hset("N1"),
                        VerifyConfig(fixed_grid=True, resolution=6, mean_value=True))
    assert fine.verified
    # a fixed grid never refines: box count is exactly the grid size
    assert fine.checks["exit"]["boxes"] == 2 * 2 * 6**3
    assert fine.checks["entry"]["boxes"] == 2 * 4 * 6**3
    assert coarse.status in (VERIFIED, INCONCLUSIVE)


def test_thread_count_invariance(data):
    F = data.mapsys
    certs = []
    for threads in (1, 2):
        cfg = VerifyConfig(mean_value=True, threads=threads)
        certs.append(verify_cover(data.hset("H2"), F, 1, data.hset("H3"), cfg))
    a, b = certs
    assert a.status == b.status == VERIFIED
    assert a.boxes == b.boxes
    assert a.max_depth == b.max_depth
    assert a.w == b.w


def test_certificate_serialization_round_trip(data):
    F = data.mapsys
    cert = verify_cover(data.hset("N1"), F, 1, data.hset("H1"), MV)
    d = cert.to_dict()
    back = CoveringCertificate.from_dict(d)
    assert back.to_dict() == d
    assert back.verified and back.w == 1
