import math

import numpy as np
import pytest

from marylab.greens import (
    DecayEstimate,
    DegenerateFitError,
    GreensMatrix,
    ResonanceError,
    cramer_oracle,
    decay_fit,
    det_cofactor,
    find_good_shift,
    greens_function,
    minor_bound_check,
    predicted_decay,
    shift_scan_order,
)
from marylab.model import ModelParams, assemble_window

from conftest import det_recursive


def test_det_cofactor_matches_recursion():
    rng = np.random.default_rng(41)
    for n in (1, 2, 5, 7):
        m = rng.standard_normal((n, n))
        assert det_cofactor(m) == pytest.approx(det_recursive(m), rel=1e-12)
    with pytest.raises(ValueError):
        det_cofactor(np.eye(13))


def test_greens_diagonal_free_case(free_params):
    w = assemble_window(free_params, 0.25, (0, 0))
    g = greens_function(w)
    assert g.values[0, 0] == pytest.approx(1.0, rel=1e-12)  # 1 / tan(pi/4)
    assert g.via == "factorized"


def test_greens_diagonal_formula(free_params):
    w = assemble_window(free_params, 0.3, (0, 7))
    g = greens_function(w)
    th = 0.3 + np.arange(8) * free_params.freq.omega
    th -= np.round(th)
    expected = 1.0 / np.tan(np.pi * th)
    assert np.allclose(np.diagonal(g.values), expected, rtol=1e-12)
    off = g.values[~np.eye(8, dtype=bool)]
    assert np.max(np.abs(off)) == 0.0


def test_greens_residual_and_hermitian(default_params):
    rng = np.random.default_rng(43)
    for _ in range(5):
        w = assemble_window(default_params, float(rng.random()), (0, 23))
        if w.singular_flag:
            continue
        g = greens_function(w)
        assert g.residual < 1e-8 * (1.0 + abs(default_params.E))
        assert np.max(np.abs(g.values - g.values.conj().T)) < 1e-10


def test_greens_resonance_error(golden, default_symbol):
    p = ModelParams(freq=golden, symbol=default_symbol, eps=0.0, E=0.0)
    w = assemble_window(p, 0.0, (0, 4))  # site 0 exactly resonant
    with pytest.raises(ResonanceError):
        greens_function(w)


def test_greens_shift_covariance(default_params):
    # G over [a,b] at x equals G over [a+s,b+s] at x - s*omega
    x = 0.321
    s = 5
    g1 = greens_function(assemble_window(default_params, x, (2, 17))).values
    g2 = greens_function(
        assemble_window(default_params, x - s * default_params.freq.omega, (2 + s, 17 + s))
    ).values
    assert np.allclose(g1, g2, atol=1e-10, rtol=1e-10)


def test_cramer_matches_factorized(default_params):
    rng = np.random.default_rng(47)
    for _ in range(8):
        n_sites = int(rng.integers(2, 7))
        x = float(rng.random())
        w = assemble_window(default_params, x, (0, n_sites - 1))
        try:
            g = greens_function(w)
        except ResonanceError:
            continue
        for n in range(n_sites):
            for npr in range(n_sites):
                c = cramer_oracle(w, n, npr)
                f = abs(g.values[n, npr])
                assert c == pytest.approx(f, rel=1e-9, abs=1e-250)


def test_cramer_free_case(free_params):
    w = assemble_window(free_params, 0.3, (0, 3))
    th = 0.3
    assert cramer_oracle(w, 0, 1) == 0.0
    expected = abs(math.cos(math.pi * th)) / abs(math.sin(math.pi * th))
    assert cramer_oracle(w, 0, 0) == pytest.approx(expected, rel=1e-12)


def test_cramer_refuses_large_sides(default_params):
    w = assemble_window(default_params, 0.3, (0, 12))
    with pytest.raises(ValueError):
        cramer_oracle(w, 0, 1)


def _synthetic_greens(rate, side=40):
    i = np.arange(side)
    values = np.exp(-rate * np.abs(i[:, None] - i[None, :]))
    return GreensMatrix(interval=(0, side - 1), values=values, via="factorized", residual=0.0)


@pytest.mark.parametrize("rate", [0.1, 0.5, 2.0])
def test_decay_fit_recovers_synthetic_rate(rate):
    fit = decay_fit(_synthetic_greens(rate))
    assert fit.rate == pytest.approx(rate, abs=1e-12)
    assert fit.r2 == pytest.approx(1.0, abs=1e-12)
    assert fit.floor_fraction == 0.0


def test_decay_fit_degenerate_on_diagonal(free_params):
    w = assemble_window(free_params, 0.3, (0, 31))
    g = greens_function(w)
    with pytest.raises(DegenerateFitError):
        decay_fit(g)


def test_decay_fit_carries_prediction(default_params):
    seed = predicted_decay(default_params, 64)
    assert seed.predicted_rate == pytest.approx(0.5)
    assert seed.predicted_offset == pytest.approx(0.01 ** (1 / 40) * 64)
    fit = decay_fit(_synthetic_greens(0.5), seed)
    assert fit.predicted_rate == seed.predicted_rate


def test_shift_scan_order():
    assert list(shift_scan_order(2)) == [0, 1, -1, 2, -2]


def test_find_good_shift_free_case(free_params):
    # diagonal operator: off-diagonal decay is vacuous, m = 0 accepted
    assert find_good_shift(free_params, 0.3, 16) == 0


def test_find_good_shift_generic(default_params):
    assert find_good_shift(default_params, 0.37, 64) == 0


def test_find_good_shift_requires_min_size(default_params):
    with pytest.raises(ValueError):
        find_good_shift(default_params, 0.3, 8)


def test_find_good_shift_scan_is_first_passing(default_params):
    # whatever m is returned, the earlier shifts in scan order must fail
    from marylab.greens import _window_is_good

    x = 0.37
    n_sites = 64
    m = find_good_shift(default_params, x, n_sites, rate_floor=0.25)
    seen = []
    for cand in shift_scan_order(8):
        if cand == m:
            break
        seen.append(cand)
    for cand in seen:
        try:
            g = greens_function(assemble_window(default_params, x, (cand, cand + n_sites - 1)))
        except ResonanceError:
            continue
        assert not _window_is_good(g, default_params, n_sites, 0.25, 0.0)


def test_minor_bound_free_case(free_params):
    w = assemble_window(free_params, 0.3, (0, 7))
    rep = minor_bound_check(w, 0, 5)
    # the minor of a diagonal matrix with row 0, column 5 removed has a zero row
    assert rep.lhs_log == -math.inf
    assert rep.passed


def test_minor_bound_random_draws(golden, default_symbol):
    rng = np.random.default_rng(53)
    for energy in (0.0, 3.0):
        p = ModelParams(freq=golden, symbol=default_symbol, eps=0.01, E=energy)
        for _ in range(10):
            x = float(rng.random())
            w = assemble_window(p, x, (0, 7))
            n, npr = rng.integers(0, 8, size=2)
            rep = minor_bound_check(w, int(n), int(npr))
            assert rep.passed
            assert rep.slack_log > 0.0


def test_minor_bound_refuses_large(default_params):
    w = assemble_window(default_params, 0.3, (0, 12))
    with pytest.raises(ValueError):
        minor_bound_check(w, 0, 1)
