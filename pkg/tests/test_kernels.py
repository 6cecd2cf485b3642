import numpy as np
import pytest

from marylab import _kernels_py, kernels
from marylab.determinant import log_abs_det
from marylab.ldt import logdet_density, logdet_density_many
from marylab.model import ModelParams, assemble_window


def _reference(params, n_sites, xs):
    out = []
    for x in xs:
        w = assemble_window(params, float(x), (0, n_sites - 1))
        out.append(log_abs_det(w.b_matrix).log_abs)
    return np.array(out)


@pytest.mark.parametrize("n_sites", [1, 5, 33, 64, 97, 300])
@pytest.mark.parametrize("eps", [0.0, 0.01])
def test_batch_matches_window_route(golden, default_symbol, n_sites, eps):
    params = ModelParams(freq=golden, symbol=default_symbol, eps=eps, E=0.5)
    rng = np.random.default_rng(n_sites)
    xs = rng.random(8)
    got = kernels.batch_logabsdet(xs, n_sites, golden.omega, params.window_taps())
    ref = _reference(params, n_sites, xs)
    assert np.allclose(got, ref, rtol=1e-10, atol=1e-10)


def test_backends_agree(golden, default_params):
    if kernels.BACKEND != "compiled":
        pytest.skip("compiled backend unavailable")
    rng = np.random.default_rng(2)
    xs = rng.random(32)
    taps = default_params.window_taps()
    for n_sites in (16, 64, 300):
        a = kernels._impl.batch_logabsdet(xs, n_sites, golden.omega, taps)
        b = _kernels_py.batch_logabsdet(xs, n_sites, golden.omega, taps)
        assert np.allclose(a, b, rtol=1e-10, atol=1e-10)


def test_thread_count_does_not_change_values(golden, default_params):
    xs = np.linspace(0.01, 0.99, 5000)
    taps = default_params.window_taps()
    one = kernels.batch_logabsdet(xs, 32, golden.omega, taps, threads=1)
    four = kernels.batch_logabsdet(xs, 32, golden.omega, taps, threads=4)
    assert np.array_equal(one, four)


def test_exact_resonance_gives_neg_inf(golden, default_symbol):
    params = ModelParams(freq=golden, symbol=default_symbol, eps=0.0, E=0.0)
    # x = 0 puts site 0 exactly at a zero of sin
    got = kernels.batch_logabsdet(np.array([0.0]), 3, golden.omega, params.window_taps())
    assert got[0] == -np.inf


def test_density_floor_handles_resonance(golden, default_symbol):
    params = ModelParams(freq=golden, symbol=default_symbol, eps=0.0, E=0.0)
    # rank-deficient window: the floor dominates, u = -(1/10) * 10 log 10
    assert logdet_density(params, 10, 0.0) == pytest.approx(-np.log(10.0), rel=1e-12)


def test_density_many_matches_scalar(default_params):
    xs = np.linspace(0.05, 0.95, 11)
    many = logdet_density_many(default_params, 20, xs)
    single = np.array([logdet_density(default_params, 20, float(x)) for x in xs])
    assert np.allclose(many, single, rtol=1e-12, atol=1e-12)


def test_density_many_complex_symbol_path(golden):
    from marylab.model import build_symbol

    sym = build_symbol(1.0, "explicit", coeffs={0: 0.1, 1: 0.05 + 0.02j, -1: 0.05 - 0.02j})
    params = ModelParams(freq=golden, symbol=sym, eps=0.1, E=0.0)
    xs = np.array([0.2, 0.6])
    vals = logdet_density_many(params, 6, xs)
    ref = np.array([logdet_density(params, 6, float(x)) for x in xs])
    assert np.allclose(vals, ref, rtol=1e-12)
