import math

import numpy as np
import pytest

from gapkit.gapnum import (GapConfig, estimate_gap_characteristic, gram_matrix,
                           knee_location, sigma_min_sweep, synthesize_gap_measure)
from gapkit.seqcore import ParameterError, PointSequence, generate

TWO_PI = 2.0 * math.pi


def test_gram_single_atom():
    p = gram_matrix([4.2], 3.0)
    assert p.gram.shape == (1, 1)
    assert p.gram[0, 0] == pytest.approx(3.0)
    assert p.sigma_min == pytest.approx(3.0)


def test_gram_full_period_orthogonality():
    p = gram_matrix([0.0, 1.0], TWO_PI)
    assert abs(p.gram[0, 1]) <= 1e-12
    assert p.sigma_min == pytest.approx(TWO_PI, abs=1e-12)
    q = gram_matrix(np.arange(64.0), TWO_PI)
    off = q.gram - TWO_PI * np.eye(64)
    assert np.max(np.abs(off)) <= 1e-12


def test_gram_two_by_two_closed_form():
    p = gram_matrix([0.0, 1.0], math.pi)
    assert p.gram[0, 1] == pytest.approx(-2j, abs=1e-12)
    assert p.sigma_min == pytest.approx(math.pi - 2.0, abs=1e-12)
    w = np.linalg.eigvalsh(p.gram)
    assert w == pytest.approx([math.pi - 2, math.pi + 2], abs=1e-12)


def test_gram_psd_and_quadratic_form():
    rng = np.random.default_rng(0)
    for _ in range(10):
        n = int(rng.integers(2, 30))
        lam = np.sort(rng.uniform(-10, 10, n)) + np.arange(n) * 1e-7
        a = rng.uniform(0.2, 6.0)
        p = gram_matrix(lam, a)
        assert np.max(np.abs(p.gram - p.gram.conj().T)) <= 1e-13
        assert p.sigma_min >= 0.0
        quad = float(np.real(p.minimizing_weights.conj() @ p.gram @ p.minimizing_weights))
        assert quad == pytest.approx(p.sigma_min, abs=1e-10)


def test_gram_input_validation():
    with pytest.raises(ParameterError):
        gram_matrix([0.0, 0.0], 1.0)
    with pytest.raises(ParameterError):
        gram_matrix([0.0, 1.0], 0.0)
    with pytest.raises(ParameterError):
        gram_matrix(np.arange(3000.0), 1.0)


def test_lattice_transition_endpoints():
    lam = np.arange(64.0)
    assert gram_matrix(lam, TWO_PI + 0.1).sigma_min >= TWO_PI - 1e-9
    assert gram_matrix(lam, math.pi).sigma_min <= 1e-6


def test_rescaling_covariance():
    lam = np.arange(8.0)
    rng = np.random.default_rng(3)
    for _ in range(5):
        a = rng.uniform(1.0, 4.0)
        s = rng.uniform(0.2, 9.0)
        lhs = gram_matrix(lam / s, s * a).sigma_min
        rhs = s * gram_matrix(lam, a).sigma_min
        assert lhs == pytest.approx(rhs, abs=1e-9 * max(1.0, s))


def test_step_ten_lattice():
    lam = np.array([0.0, 10.0, 20.0, 30.0])
    p = gram_matrix(lam, TWO_PI / 10 + 0.01)
    assert p.sigma_min >= TWO_PI / 10 - 1e-9


def test_sweep_monotone_and_knee():
    lam = np.arange(64.0)
    grid = np.linspace(0.2 * TWO_PI, 1.15 * TWO_PI, 50)
    sw = sigma_min_sweep(lam, grid)
    assert np.min(np.diff(sw.sigma_values)) >= -1e-10
    assert 0.85 * TWO_PI <= sw.knee <= 1.05 * TWO_PI


def test_sweep_threads_match_serial():
    lam = np.arange(32.0)
    grid = np.linspace(1.0, 7.0, 12)
    serial = sigma_min_sweep(lam, grid, threads=1)
    pooled = sigma_min_sweep(lam, grid, threads=4)
    assert np.allclose(serial.sigma_values, pooled.sigma_values, atol=1e-12)


def test_knee_locator_on_synthetic_curve():
    a = np.linspace(0.0, 10.0, 101)
    sigma = np.where(a < 6.0, 1e-16, np.minimum(np.exp(a - 6.0) * 1e-12, 1.0))
    knee = knee_location(a, sigma)
    assert 5.5 <= knee <= 7.5


def test_synthesize_two_atoms():
    syn = synthesize_gap_measure([0.0, 1.0], math.pi)
    assert syn.l2_gap_norm == pytest.approx(math.sqrt(math.pi - 2.0), abs=1e-10)
    assert abs(syn.quadrature_l2 - (math.pi - 2.0)) <= 1e-8


def test_synthesize_single_atom():
    syn = synthesize_gap_measure([2.5], 1.7)
    assert syn.l2_gap_norm == pytest.approx(math.sqrt(1.7), abs=1e-12)
    assert syn.sup_gap_norm == pytest.approx(1.0, abs=1e-12)


def test_synthesize_lattice_gap_quality():
    syn = synthesize_gap_measure(np.arange(64.0), math.pi)
    assert syn.l2_gap_norm <= 1e-3
    t = np.linspace(0.0, 0.9 * math.pi, 1500)
    vals = np.abs(syn.measure.fourier(t))
    assert np.max(vals) <= 1e-2


def test_synthesize_quadrature_consistency_random():
    rng = np.random.default_rng(12)
    for _ in range(15):
        n = int(rng.integers(2, 40))
        lam = np.sort(rng.uniform(-15, 15, n)) + np.arange(n) * 1e-7
        a = rng.uniform(0.1, 5.0)
        syn = synthesize_gap_measure(lam, a)  # 1e-8 agreement asserted inside
        assert syn.l2_gap_norm ** 2 == pytest.approx(syn.quadrature_l2, abs=1e-8)


def test_estimate_lattice():
    seq = generate("lattice:1", (-1500, 1500))
    cert = estimate_gap_characteristic(seq, GapConfig(sweep_enabled=False))
    assert 0.9 <= cert.c_estimate <= 1.0
    assert cert.g_estimate == 2.0 * math.pi * cert.c_estimate
    assert cert.energy_verdict == "supported"
    assert cert.shortness_verdict == "short"


def test_estimate_with_sweep_knee():
    seq = generate("lattice:1", (-1500, 1500))
    cert = estimate_gap_characteristic(
        seq, GapConfig(sweep_points=30, sweep_n_max=64))
    assert cert.sweep is not None
    center = 2.0 * math.pi * cert.c_estimate
    assert 0.7 * center <= cert.gram_knee <= 1.1 * center


def test_estimate_lacunary_zero():
    seq = generate("lacunary:2", (1, 2 ** 16))
    cert = estimate_gap_characteristic(seq, GapConfig(sweep_enabled=False))
    assert cert.c_estimate <= 0.01


def test_estimate_monotone_under_insertion():
    # random extras can only help the counting gates; near-collisions are
    # absorbed by the subsequence retry of the energy gate
    rng = np.random.default_rng(4)
    seq = generate("lattice:2", (-2000, 2000))
    base = estimate_gap_characteristic(seq, GapConfig(sweep_enabled=False)).c_estimate
    extra = rng.uniform(-2000, 2000, 80)
    pts = np.unique(np.concatenate([seq.points, extra]))
    denser = PointSequence(pts, seq.window)
    again = estimate_gap_characteristic(denser, GapConfig(sweep_enabled=False)).c_estimate
    assert again >= base - 1e-3 - 1e-12


def test_certificate_serializes():
    seq = generate("lattice:1", (-300, 300))
    cert = estimate_gap_characteristic(seq, GapConfig(sweep_enabled=False))
    d = cert.to_json_dict()
    assert d["g_estimate"] == pytest.approx(2 * math.pi * d["c_estimate"])
    assert isinstance(d["partition_breakpoints"], list)
