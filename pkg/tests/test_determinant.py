import math

import numpy as np
import pytest

from conftest import det_recursive

from marylab.determinant import CircleMatrixFamily, det_identity_check, jensen_check, log_abs_det
from marylab.model import ModelParams, assemble_window


def test_log_abs_det_diagonal():
    ld = log_abs_det(np.diag([2.0, 3.0, 4.0]))
    assert ld.log_abs == pytest.approx(math.log(24.0), abs=1e-14)
    assert ld.phase == 1.0
    assert not ld.rank_deficient


def test_log_abs_det_matches_cofactor_oracle():
    rng = np.random.default_rng(17)
    for side in (2, 4, 6, 8):
        for _ in range(5):
            m = rng.standard_normal((side, side))
            ld = log_abs_det(m)
            ref = det_recursive(m)
            assert ld.log_abs == pytest.approx(math.log(abs(ref)), rel=1e-10)
            assert math.exp(ld.log_abs) * ld.phase == pytest.approx(ref, rel=1e-10)


def test_log_abs_det_complex_phase():
    rng = np.random.default_rng(23)
    m = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    ld = log_abs_det(m)
    ref = det_recursive(m)
    assert abs(abs(ld.phase) - 1.0) < 1e-12
    assert math.exp(ld.log_abs) * ld.phase == pytest.approx(ref, rel=1e-10)


def test_log_abs_det_singular():
    m = np.array([[1.0, 2.0], [2.0, 4.0]])
    ld = log_abs_det(m)
    assert ld.rank_deficient
    assert ld.log_abs == -math.inf
    assert ld.det == 0.0


def test_log_abs_det_rejects_bad_input():
    with pytest.raises(ValueError):
        log_abs_det(np.ones((2, 3)))
    with pytest.raises(ValueError):
        log_abs_det(np.array([[np.inf]]))


def test_log_abs_det_diagonal_free_window(free_params):
    # eps = 0: B is diagonal, log|det| is the sum of log|sin - E cos|
    w = assemble_window(free_params, 0.3, (0, 15))
    ld = log_abs_det(w.b_matrix)
    assert ld.log_abs == pytest.approx(np.sum(np.log(np.abs(np.diagonal(w.b_matrix)))), rel=1e-14)


def test_log_abs_det_permutation_invariance():
    rng = np.random.default_rng(5)
    m = rng.standard_normal((12, 12))
    base = log_abs_det(m)
    for _ in range(5):
        perm = rng.permutation(12)
        ld = log_abs_det(m[perm])
        assert ld.log_abs == pytest.approx(base.log_abs, rel=1e-10)
        assert abs(ld.phase) == pytest.approx(abs(base.phase))


def test_log_abs_det_multiplicative():
    rng = np.random.default_rng(29)
    for n in (8, 64):
        a = rng.standard_normal((n, n)) + np.eye(n) * 3.0
        b = rng.standard_normal((n, n)) + np.eye(n) * 3.0
        lhs = log_abs_det(a @ b).log_abs
        rhs = log_abs_det(a).log_abs + log_abs_det(b).log_abs
        assert lhs == pytest.approx(rhs, rel=1e-8)


def test_log_abs_det_no_overflow_large_scale():
    # |det| = 10^(+-400) overflows doubles; the log path must not
    n = 200
    up = np.diag(np.full(n, 100.0))
    down = np.diag(np.full(n, 0.01))
    assert log_abs_det(up).log_abs == pytest.approx(n * math.log(100.0), rel=1e-12)
    assert log_abs_det(down).log_abs == pytest.approx(-n * math.log(100.0), rel=1e-12)


def test_circle_family_matches_window(default_params):
    rng = np.random.default_rng(31)
    for n_sites in (3, 17, 40):
        fam = CircleMatrixFamily(default_params, n_sites)
        x = float(rng.random())
        w = assemble_window(default_params, x, (0, n_sites - 1))
        lhs = fam.log_abs_det(np.exp(2j * np.pi * x))
        rhs = log_abs_det(w.b_matrix).log_abs
        assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-8)


def test_det_identity_free_case(golden, default_symbol):
    # eps = 0: both sides collapse to (|E - i|/2)^N
    for energy in (0.0, 1.0, 3.0):
        p = ModelParams(freq=golden, symbol=default_symbol, eps=0.0, E=energy)
        rep = det_identity_check(p, 5)
        assert rep.rel_discrepancy < 1e-12
        expected = 5 * math.log(abs(energy - 1j) / 2.0)
        assert rep.lhs_log == pytest.approx(expected, rel=1e-12)
        assert rep.passed


def test_det_identity_coupled(default_params):
    rep = det_identity_check(default_params, 8)
    assert rep.rel_discrepancy < 1e-10
    assert rep.passed


def test_det_identity_contraction_bound(golden, default_symbol):
    rng = np.random.default_rng(37)
    for _ in range(20):
        eps = float(rng.uniform(0.0, 0.4)) / default_symbol.l1_norm
        n_sites = int(rng.integers(2, 33))
        energy = float(rng.uniform(-3, 3))
        p = ModelParams(freq=golden, symbol=default_symbol, eps=eps, E=energy)
        rep = det_identity_check(p, n_sites)
        assert rep.bound_ok
        assert rep.passed


def test_jensen_check_structure(default_params):
    rep = jensen_check(default_params, 8, quad_points=512)
    assert np.isfinite(rep.circle_mean)
    assert np.isfinite(rep.slack)
    # real spectral resonances put every zero of the circle polynomial on
    # |z| = 1, so the true circle mean equals the origin value and the
    # reported slack is pure quadrature noise around zero
    assert abs(rep.slack) < 0.5


def test_jensen_single_factor_closed_form(golden, default_symbol):
    # one affine factor: log|det B1(0)| = log(|E-i|/2); with a single site the
    # 10^-1 floor lifts the circle integrand appreciably, so the slack is
    # strictly positive (flooring only ever raises the circle mean)
    p = ModelParams(freq=golden, symbol=default_symbol, eps=0.0, E=1.0)
    rep = jensen_check(p, 1, quad_points=8192)
    assert rep.at_origin == pytest.approx(math.log(abs(1.0 - 1j) / 2.0), rel=1e-12)
    assert rep.passed
    assert 0.0 < rep.slack < 0.5


def test_jensen_rejects_few_points(default_params):
    with pytest.raises(ValueError):
        jensen_check(default_params, 4, quad_points=32)
