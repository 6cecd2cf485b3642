import math

import numpy as np
import pytest

from marylab.model import (
    ModelParams,
    assemble_window,
    build_symbol,
    epsilon_budget,
    singularity_distance,
)


def test_default_symbol_l1_closed_form(default_symbol):
    # margin * (1 + 2 e^{-1}/(1 - e^{-1})), truncation tail below double resolution
    expected = 0.99 * (1.0 + 2.0 / (math.e - 1.0))
    assert default_symbol.l1_norm == pytest.approx(expected, abs=1e-10)
    assert default_symbol.is_real_even


def test_symbol_decay_violation_names_offset():
    with pytest.raises(ValueError, match=r"phihat\(0\)"):
        build_symbol(1.0, "explicit", coeffs={0: 2.0})


def test_symbol_truncation_radius():
    sym = build_symbol(2.0, "exp_decay", decay=2.0, margin=0.5)
    # smallest R with 0.5 exp(-2R) < 1e-16
    assert sym.truncation_radius == 19
    assert all(abs(n) <= 19 for n in sym.coeffs)


def test_symbol_non_hermitian_rejected():
    with pytest.raises(ValueError, match="Hermitian"):
        build_symbol(1.0, "explicit", coeffs={1: 0.1, -1: 0.2})


def test_symbol_hermitian_complex_accepted():
    sym = build_symbol(1.0, "explicit", coeffs={1: 0.1 + 0.05j, -1: 0.1 - 0.05j})
    assert not sym.is_real_even
    assert sym.l1_norm == pytest.approx(2 * abs(0.1 + 0.05j))


def test_nearest_neighbor_rule():
    sym = build_symbol(1.0, "nearest_neighbor", margin=0.9)
    assert sym.coefficient(1) == pytest.approx(0.9 * math.exp(-1.0))
    assert sym.coefficient(0) == 0.0
    assert sym.truncation_radius == 1


def test_assemble_single_site(free_params):
    w = assemble_window(free_params, 0.25, (0, 0))
    assert w.h_minus_e[0, 0] == pytest.approx(1.0, abs=1e-14)          # tan(pi/4)
    assert w.b_matrix[0, 0] == pytest.approx(math.sin(math.pi / 4), abs=1e-15)
    assert not w.singular_flag


def test_assemble_exact_cancellation(golden, default_symbol):
    p = ModelParams(freq=golden, symbol=default_symbol, eps=0.0, E=1.0)
    w = assemble_window(p, 0.25, (0, 0))
    assert abs(w.b_matrix[0, 0]) < 1e-15                                # sin - cos at pi/4


def test_factorization_identity(default_params):
    rng = np.random.default_rng(3)
    for _ in range(5):
        x = float(rng.uniform(0.01, 0.99))
        w = assemble_window(default_params, x, (-4, 9))
        if w.singular_flag:
            continue
        lhs = w.h_minus_e
        rhs = (1.0 / w.cos_diag)[:, None] * w.b_matrix
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(lhs))


def test_assemble_near_singular_taylor_bound(default_params):
    omega = default_params.freq.omega
    x = (0.5 - 3 * omega + 1e-10) % 1.0
    w = assemble_window(default_params, x, (0, 5))
    assert w.singular_flag
    assert np.all(np.isfinite(w.b_matrix))
    assert np.isinf(w.h_minus_e[3, 3])
    eps, rho = default_params.eps, default_params.symbol.rho
    for n_prime in range(6):
        if n_prime == 3:
            continue
        bound = eps * math.exp(-rho * abs(3 - n_prime)) * math.pi * 1e-10 + 1e-20
        assert abs(w.b_matrix[3, n_prime]) <= bound


def test_assemble_entry_bounds(default_params):
    rng = np.random.default_rng(11)
    p = default_params
    for _ in range(5):
        w = assemble_window(p, float(rng.random()), (0, 19))
        diag_bound = 1.0 + abs(p.eps * p.symbol.coefficient(0).real - p.E)
        assert np.max(np.abs(np.diagonal(w.b_matrix))) <= diag_bound + 1e-12
        i = np.arange(w.side)
        d = np.abs(i[:, None] - i[None, :])
        off = d > 0
        bound = p.eps * np.exp(-p.symbol.rho * d)
        assert np.all(np.abs(w.b_matrix)[off] <= bound[off] + 1e-18)


def test_assemble_deterministic(default_params):
    a = assemble_window(default_params, 0.123456, (0, 31))
    b = assemble_window(default_params, 0.123456, (0, 31))
    assert np.array_equal(a.b_matrix, b.b_matrix)
    assert np.array_equal(a.h_minus_e, b.h_minus_e)


def test_b_matrix_column_scaled_hermitian(default_params):
    # B(n,n') cos(pi theta_{n'}) is Hermitian for real E and Hermitian symbol
    rng = np.random.default_rng(5)
    for _ in range(3):
        w = assemble_window(default_params, float(rng.random()), (0, 11))
        m = w.b_matrix * w.cos_diag[None, :]
        assert np.max(np.abs(m - m.conj().T)) < 1e-14


def test_singularity_distance_examples(golden):
    assert singularity_distance(golden, 0.0, (0, 0)) == pytest.approx(0.5)
    assert singularity_distance(golden, 0.5, (0, 0)) == 0.0
    # brute force over the 101 sites
    got = singularity_distance(golden, 0.1, (0, 100))
    brute = min(
        abs((0.1 + n * golden.omega - 0.5) - round(0.1 + n * golden.omega - 0.5))
        for n in range(101)
    )
    assert got == pytest.approx(brute, rel=1e-14)


def test_params_validation(golden, default_symbol):
    with pytest.raises(ValueError, match="eps"):
        ModelParams(freq=golden, symbol=default_symbol, eps=0.5, E=0.0)
    with pytest.raises(ValueError, match="cap"):
        ModelParams(freq=golden, symbol=default_symbol, eps=0.01, E=9.0, C0=5.0)


def test_epsilon_budget_large_rho_l1_bound(default_symbol):
    b = epsilon_budget(50.0, default_symbol)
    assert not b.empty
    assert b.binding == "l1"
    assert b.eps_hat == pytest.approx(1.0 / default_symbol.l1_norm, rel=1e-9)
    assert b.l1_slack >= 0.0
    assert b.rate_slack >= 0.0


def test_epsilon_budget_rho1_rate_bound_is_empty(default_symbol):
    # the rate constraint binds far below the 1e-12 floor at rho = 1
    b = epsilon_budget(1.0, default_symbol)
    assert b.binding == "rate"
    assert b.empty
    assert b.eps_hat < 1e-12
    # independent check of the boundary: entropy(t) + t log 2 = 1/2 at t = eps^(1/20)
    t = b.eps_hat ** 0.05
    f = -(1 - t) * math.log1p(-t) - t * math.log(t)
    assert f + t * math.log(2.0) == pytest.approx(0.5, abs=1e-9)


def test_epsilon_budget_slacks_nonnegative(default_symbol):
    for rho in (3.0, 5.0, 50.0):
        b = epsilon_budget(rho, default_symbol)
        if not b.empty:
            assert b.l1_slack >= 0.0
            assert b.rate_slack >= 0.0
