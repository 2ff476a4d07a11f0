import mpmath
import numpy as np
import pytest

from padefaber.ddarith import DDComplex, stack, unit_roots


def _mp(x):
    return x.to_mp()


def test_round_trip_through_mpmath():
    with mpmath.workdps(40):
        v = mpmath.mpc(mpmath.pi, -mpmath.e) / 7
        d = DDComplex.coerce(v)
        back = d.to_mp().item()
        assert abs(back - v) < mpmath.mpf(10) ** -31


def test_arithmetic_matches_mpmath():
    rng = np.random.default_rng(3)
    a = rng.normal(size=5) + 1j * rng.normal(size=5)
    b = rng.normal(size=5) + 1j * rng.normal(size=5)
    A, B = DDComplex.coerce(a), DDComplex.coerce(b)
    ops = {
        "add": (A + B, lambda x, y: x + y),
        "sub": (A - B, lambda x, y: x - y),
        "mul": (A * B, lambda x, y: x * y),
        "div": (A / B, lambda x, y: x / y),
        "pow": (A ** 7, lambda x, y: x ** 7),
        "rdiv": (1 / A, lambda x, y: 1 / x),
    }
    with mpmath.workdps(50):
        for name, (got, ref) in ops.items():
            for k in range(5):
                expect = ref(mpmath.mpc(a[k]), mpmath.mpc(b[k]))
                err = abs(got.to_mp()[k] - expect) / abs(expect)
                assert err < 1e-30, name


def test_numpy_defers_to_dd():
    A = DDComplex.coerce(np.array([1 + 1j, 2.0]))
    out = np.array([2.0, 3.0]) * A
    assert isinstance(out, DDComplex)
    np.testing.assert_allclose(out.to_complex(), [2 + 2j, 6.0])


def test_sum_is_compensated():
    # 1 + 1e-20 repeated: plain float summation would drop the tail entirely
    x = DDComplex(np.ones(1000), np.full(1000, 1e-20), np.zeros(1000), np.zeros(1000))
    with mpmath.workdps(40):
        total = x.sum().to_mp().item()
        assert abs(total - (1000 + mpmath.mpf("1e-17"))) < mpmath.mpf(10) ** -27


def test_unit_roots_and_stack():
    r = unit_roots(8)
    np.testing.assert_allclose(r.to_complex(), np.exp(-2j * np.pi * np.arange(8) / 8), atol=1e-15)
    s = stack([r, r * 2])
    assert s.shape == (2, 8)
    with pytest.raises(ValueError):
        r ** -1
