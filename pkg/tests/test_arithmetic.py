import math

import numpy as np
import pytest

from marylab.arithmetic import (
    Frequency,
    continued_fraction,
    convergents,
    dc_constant,
    golden_frequency,
    torus_norm,
)


def test_torus_norm_examples():
    assert torus_norm(0.75) == pytest.approx(0.25, abs=1e-15)
    assert torus_norm(3.2) == pytest.approx(0.2, abs=1e-12)
    assert torus_norm(0.5) == 0.5


def test_torus_norm_rejects_non_finite():
    with pytest.raises(ValueError):
        torus_norm(float("inf"))
    with pytest.raises(ValueError):
        torus_norm(np.array([0.1, float("nan")]))


def test_torus_norm_periodicity_and_symmetry():
    rng = np.random.default_rng(7)
    x = rng.uniform(-5, 5, size=200)
    m = rng.integers(-3, 4, size=200)
    assert np.max(np.abs(torus_norm(x + m) - torus_norm(x))) < 1e-12
    assert np.max(np.abs(torus_norm(-x) - torus_norm(x))) == 0.0


def test_continued_fraction_golden():
    cf = continued_fraction(golden_frequency().omega, 10)
    assert cf.quotients == (1,) * 10
    assert not cf.terminated


def test_continued_fraction_rational():
    cf = continued_fraction(1.0 / 3.0, 10)
    assert cf.quotients == (3,)
    assert cf.terminated


def test_continued_fraction_sqrt2():
    cf = continued_fraction(math.sqrt(2.0) - 1.0, 6)
    assert cf.quotients == (2,) * 6
    assert not cf.terminated


def test_continued_fraction_domain():
    with pytest.raises(ValueError):
        continued_fraction(1.5, 5)
    with pytest.raises(ValueError):
        continued_fraction(0.3, 41)


def test_convergents_approximate():
    omega = golden_frequency().omega
    cf = continued_fraction(omega, 18)
    for p, q in convergents(cf):
        assert abs(omega - p / q) < 1.0 / q**2


def test_dc_constant_golden_k1():
    freq = golden_frequency()
    # ||omega|| = 1 - omega = omega^2 for the inverse golden ratio
    assert dc_constant(freq, 1, A=2.0) == pytest.approx(1.0 - freq.omega, abs=1e-15)


def test_dc_constant_golden_k100_bruteforce():
    freq = golden_frequency()
    got = dc_constant(freq, 100, A=1.0)
    # independent brute force with plain python arithmetic
    best = min(abs(k * freq.omega - round(k * freq.omega)) * k for k in range(1, 101))
    assert got == pytest.approx(best, rel=1e-14)
    assert 0.38196 < got < 0.38197


def test_dc_constant_rational_failure():
    freq = Frequency(0.5, A=1.0)
    assert dc_constant(freq, 2, A=1.0) == 0.0


def test_dc_constant_golden_floor():
    # for the inverse golden ratio the minimum of ||k omega|| k^A with A >= 1
    # sits at k = 1 (value omega^2 = 1 - omega); k ||k omega|| >= 0.437 for
    # every k >= 2, approaching the Hurwitz constant 1/sqrt(5) from above
    freq = golden_frequency()
    for K in (10, 100, 10_000):
        for A in (1.0, 2.0):
            assert dc_constant(freq, K, A=A) == pytest.approx(1.0 - freq.omega, abs=1e-14)
    k = np.arange(2, 10_001, dtype=float)
    prods = torus_norm(k * freq.omega) * k
    assert prods.min() > 0.437


def test_frequency_validation():
    with pytest.raises(ValueError):
        Frequency(1.2)
    with pytest.raises(ValueError):
        Frequency(0.4, A=-1.0)
    with pytest.raises(ValueError):
        Frequency(0.4, c=0.0)
