import math

import numpy as np
import pytest

from gapkit.density import (bm_density, counting_residual, d3_residual_curve,
                            d4_complement_estimate, density_d3,
                            density_estimate, density_lower, density_upper_d4,
                            match_to_ideal_grid, verify_family_witness,
                            verify_partition_witness)
from gapkit.partitions import greedy_density_partition
from gapkit.seqcore import ParameterError, PointSequence, generate

WINDOW = (-2000.0, 2000.0)


def test_d1_lattice():
    est = density_lower(generate("lattice:1", WINDOW), "d1")
    assert est.value == pytest.approx(1.0, abs=0.05)
    assert est.witness["verified"]


def test_d1_halved_lattice():
    est = density_lower(generate("lattice:2", WINDOW), "d1")
    assert est.value == pytest.approx(0.5, abs=0.025)


def test_d2_on_perturbed():
    est = density_lower(generate("perturbed:1,0.3", WINDOW, seed=3), "d2")
    assert est.value == pytest.approx(1.0, abs=0.05)


def test_density_of_finite_set():
    pts = np.linspace(0.05, 0.95, 10)
    seq = PointSequence(pts, (0.0, 1.0))
    assert density_lower(seq, "d1").value == 0.0
    assert bm_density(seq).value == 0.0


def test_witness_verification_round_trip():
    seq = generate("lattice:1", WINDOW)
    res = greedy_density_partition(seq, 1.0)
    assert verify_partition_witness(seq, 1.0, res.partition, True)
    assert not verify_partition_witness(seq, 1.2, res.partition, True)


# ---------------------------------------------------------------------------
# d3: counting residual
# ---------------------------------------------------------------------------

def test_d3_lattice_flat_and_bounded():
    seq = generate("lattice:1", WINDOW)
    resid = density_d3(seq, 1.0)
    # fractional-part bound: the mismatch never exceeds 1, so the residual
    # is below the full Poisson mass
    assert resid <= math.pi
    curve = d3_residual_curve(seq, 1.0)
    assert curve[-1][1] - curve[1][1] <= 0.1


def test_d3_slope_mismatch_grows():
    seq = generate("lattice:1", WINDOW)
    r_full = density_d3(seq, 1.2)
    half = seq.restrict(-1000, 1000)
    r_half = density_d3(half, 1.2)
    # |n - 1.2 x| ~ 0.2|x| makes the residual grow by ~0.4 per doubling
    assert r_full - r_half >= 0.1


def test_d3_empty_sequence_closed_form():
    seq = PointSequence(np.empty(0), (-50.0, 80.0))
    a = 0.7
    resid = density_d3(seq, a)
    expected = a * 0.5 * (math.log(1 + 50.0 ** 2) + math.log(1 + 80.0 ** 2))
    assert resid == pytest.approx(expected, rel=1e-12)


def test_d3_requires_positive_slope():
    with pytest.raises(ParameterError):
        density_d3(generate("lattice:1", (0, 10)), 0.0)


def test_matching_thins_to_target():
    # at half the true density the matching must skip alternate points
    seq = generate("lattice:1", (0, 100))
    matched = match_to_ideal_grid(seq, 0.5)
    assert np.allclose(np.diff(matched), 2.0)


def test_counting_residual_exactness():
    # single matched point at 1, slope 1, window [0, 2]:
    # n = 0 on (0,1), n = 1 on (1,2); integrals in closed form
    matched = np.array([1.0])

    def F(x, c, a=1.0):
        return c * math.atan(x) - 0.5 * a * math.log1p(x * x)

    expected = abs(F(1.0, 0.0) - F(0.0, 0.0)) \
        + abs(F(1.0, 1.0) - F(1.0, 1.0, )) * 0  # crossing at x = 1 exactly
    expected = (0.5 * math.log(2.0)) + abs(F(2.0, 1.0) - F(1.0, 1.0))
    assert counting_residual(matched, 1.0, (0.0, 2.0)) == pytest.approx(expected, rel=1e-12)


# ---------------------------------------------------------------------------
# d4 and BM long families
# ---------------------------------------------------------------------------

def test_d4_refutes_lacunary():
    seq = generate("lacunary:2", (1, 2 ** 20))
    refuted, witness = density_upper_d4(seq, 0.01)
    assert refuted
    fam = [tuple(iv) for iv in witness["intervals"]]
    assert verify_family_witness(seq, 0.01, fam, "below")
    # the dyadic gaps themselves appear as members
    assert (1.0, 2.0) in fam or (2.0, 4.0) in fam


def test_d4_cannot_refute_dense_lattices():
    assert not density_upper_d4(generate("lattice:1", WINDOW), 0.5)[0]
    assert not density_upper_d4(generate("lattice:2", WINDOW), 0.4)[0]


def test_d4_complement_tracks_density():
    est = d4_complement_estimate(generate("lattice:1", WINDOW))
    assert est.value == pytest.approx(1.0, abs=0.05)


def test_bm_lattice():
    est = bm_density(generate("lattice:1", WINDOW))
    assert est.value == pytest.approx(1.0, abs=0.05)
    assert est.witness["verified"]


def test_bm_one_sided():
    right = generate("lattice:1", (0, 2000))
    seq = PointSequence(right.points, (-2000, 2000), "union")
    assert bm_density(seq).value == pytest.approx(1.0, abs=0.05)


def test_sandwich_interior_below_bm():
    for spec, seed in (("lattice:1", None), ("lattice:2", None),
                       ("perturbed:1,0.3", 1)):
        seq = generate(spec, WINDOW, seed=seed)
        d1 = density_lower(seq, "d1").value
        bm = bm_density(seq).value
        assert d1 <= bm + 0.05


def test_monotone_under_insertion():
    rng = np.random.default_rng(17)
    seq = generate("lattice:2", (-500, 500))
    base = density_lower(seq, "d1").value
    extra = rng.uniform(-500, 500, 300)
    pts = np.unique(np.concatenate([seq.points, extra]))
    denser = PointSequence(pts, seq.window)
    assert density_lower(denser, "d1").value >= base - 1e-3 - 1e-12


def test_scaling_covariance():
    seq = generate("lattice:1", (-1000, 1000))
    base = density_lower(seq, "d1").value
    for t in (0.5, 2.0):
        scaled = seq.scale(t)
        est = density_lower(scaled, "d1").value
        assert est == pytest.approx(base / t, abs=0.05 * max(1.0, 1.0 / t))


def test_density_estimate_dispatch():
    seq = generate("lattice:1", (-500, 500))
    for m in ("d1", "d2", "d3", "d4", "bm"):
        est = density_estimate(seq, m)
        assert est.method == m
        assert 0.9 <= est.value <= 1.1
    with pytest.raises(ParameterError):
        density_estimate(seq, "d9")
