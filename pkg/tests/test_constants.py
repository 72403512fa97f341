import mpmath
import pytest
from mpmath import mp

from betaescape.constants import (
    golden_ratio,
    komornik_loreti,
    multinacci,
    named_constant,
    poly_root,
    thue_morse,
)
from oracles import GOLDEN, KL_DIGITS, TRIBONACCI


def test_golden_64_bits():
    g = golden_ratio(64)
    assert mpmath.nstr(g, 17) == "1.6180339887498948"
    with mp.workprec(64):
        assert abs(g * g - g - 1) < mpmath.ldexp(1, -56)
        assert abs(1 / (g * (g - 1)) - 1) < mpmath.ldexp(1, -56)


def test_golden_high_precision_residual():
    with mp.workprec(256):
        g = golden_ratio(256)
        assert abs(g * g - g - 1) < mpmath.ldexp(1, -250)


def test_thue_morse_small_values():
    assert [thue_morse(n) for n in (1, 2, 3, 4)] == [1, 1, 0, 1]


@pytest.mark.parametrize("n", range(1, 200))
def test_thue_morse_recurrences(n):
    assert thue_morse(2 * n) == thue_morse(n)
    assert thue_morse(2 * n + 1) == 1 - thue_morse(n)


def test_thue_morse_rejects_zero():
    with pytest.raises(ValueError):
        thue_morse(0)


def test_komornik_loreti_digits():
    kl = komornik_loreti(128)
    assert mpmath.nstr(kl, 10, strip_zeros=False) == KL_DIGITS
    assert GOLDEN < float(kl) < 2


def test_komornik_loreti_stable_under_longer_series():
    base = komornik_loreti(96)
    longer = komornik_loreti(96, terms=2 * int((96 + 16) / 0.76) + 16)
    with mp.workprec(96):
        assert abs(base - longer) < mpmath.ldexp(1, -90)


def test_komornik_loreti_defining_series():
    with mp.workprec(160):
        kl = komornik_loreti(128)
        s = mpmath.fsum(thue_morse(n) * kl ** (-n) for n in range(1, 400))
        assert abs(s - 1) < mpmath.ldexp(1, -120)


def test_komornik_loreti_precision_floor():
    with pytest.raises(ValueError):
        komornik_loreti(16)


def test_multinacci_values():
    assert multinacci(2, 80) == golden_ratio(80)
    assert abs(float(multinacci(3)) - TRIBONACCI) < 1e-15
    with mp.workprec(128):
        t = multinacci(3)
        assert abs(t ** 3 - t ** 2 - t - 1) < mpmath.ldexp(1, -120)


def test_multinacci_monotone_towards_two():
    vals = [multinacci(k, 80) for k in range(2, 9)]
    assert all(x < y for x, y in zip(vals, vals[1:]))
    assert vals[-1] < 2
    assert 2 - vals[-1] < 0.01


def test_multinacci_rejects_k1():
    with pytest.raises(ValueError):
        multinacci(1)


def test_poly_root_errors():
    with pytest.raises(ValueError):
        poly_root((1, 0, 1), 0, 2, 64)  # x^2 + 1 has no real root
    with pytest.raises(ValueError):
        poly_root((1, -1), 1, 2, 64)  # root at the endpoint
    with pytest.raises(ValueError):
        poly_root((1, -3), 2, 1, 64)


@pytest.mark.parametrize("name", ["golden", "kl", "tribonacci", "multinacci:4"])
def test_named_constants_resolve(name):
    c = named_constant(name, 96)
    assert c.precision == 96
    assert 1 < float(c.value) < 2
    assert c.defining_relation


def test_named_constant_unknown():
    with pytest.raises(ValueError):
        named_constant("pi")
