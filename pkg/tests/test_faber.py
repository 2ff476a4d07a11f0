import mpmath
import numpy as np
import pytest

from padefaber.errors import IndeterminateRateError, QuadratureError
from padefaber.faber import (
    FaberCoefficients,
    estimate_rho0,
    evaluate_faber_series,
    faber_basis,
    faber_coefficients,
    faber_values,
    resolve_engine,
)
from padefaber.geometry import boundary_points, disk, level_curve_nodes, psi_prime, segment


def cauchy_power_coefficients(g, n, rho=2.0, N=4096):
    """Monomial coefficients of Phi_n straight from the Cauchy-integral definition.

    Expanding 1/(t - z) about z = 0 gives
    [z^j] Phi_n = (1/2 pi i) int_{Gamma_rho} Phi(t)^n t^{-(j+1)} dt, valid while 0 lies inside Gamma_rho.
    """
    t, w = level_curve_nodes(g, rho, N)
    dt = psi_prime(g, w) * w
    return np.array([np.mean(w**n * t ** (-(j + 1)) * dt) for j in range(n + 1)])


def cauchy_values(g, n, z, rho=2.0, N=4096):
    t, w = level_curve_nodes(g, rho, N)
    dt = psi_prime(g, w) * w
    return np.array([np.mean(w**n * dt / (t - zz)) for zz in z])


def test_segment_basis_is_twice_chebyshev():
    B = faber_basis(segment(), 3)
    np.testing.assert_allclose(B[0].coeffs, [1])
    np.testing.assert_allclose(B[1].coeffs, [0, 2])
    np.testing.assert_allclose(B[2].coeffs, [-2, 0, 4])
    np.testing.assert_allclose(B[3].coeffs, [0, -6, 0, 8])


def test_disk_basis_is_powers():
    g = disk(1j, 2.0)
    B = faber_basis(g, 4)
    z = np.array([0.3, 2 - 1j])
    for n in range(5):
        np.testing.assert_allclose(B[n](z), ((z - 1j) / 2) ** n, rtol=1e-13)


def test_recurrence_matches_cauchy_definition(geometry):
    B = faber_basis(geometry, 20)
    for n in range(21):
        ref = cauchy_power_coefficients(geometry, n)
        got = np.pad(B[n].coeffs, (0, n + 1 - len(B[n].coeffs)))
        assert np.max(np.abs(got - ref)) / np.max(np.abs(ref)) < 1e-9


def test_values_match_cauchy_definition_on_E(geometry):
    z = boundary_points(geometry, 16)
    vals = faber_values(geometry, z, 12)
    for n in (0, 1, 5, 12):
        ref = cauchy_values(geometry, n, z)
        assert np.max(np.abs(vals[n] - ref)) < 1e-10 * max(1.0, np.max(np.abs(ref)))


def test_values_match_power_basis(geometry):
    z = np.array([0.1, -0.4 + 0.3j])
    B = faber_basis(geometry, 8)
    vals = faber_values(geometry, z, 8)
    for n in range(9):
        np.testing.assert_allclose(vals[n], B[n](z), rtol=1e-12, atol=1e-12)


def test_biorthogonality_double(geometry):
    c = faber_coefficients(lambda t: faber_values(geometry, t, 12)[7], geometry, 12, 2.0, 1024).values
    expect = np.zeros(13)
    expect[7] = 1
    np.testing.assert_allclose(c, expect, atol=1e-10)


def test_coefficients_of_simple_pole_on_disk():
    # 1/(z - 2) = -sum z^n / 2^{n+1}
    c = faber_coefficients(lambda t: 1 / (t - 2), disk(), 20, 1.5, 256)
    np.testing.assert_allclose(c.values, -(0.5 ** np.arange(1, 22)), rtol=1e-9, atol=1e-15)
    assert c.rho_used == 1.5 and c.N_used == 256


def test_extended_engines_agree():
    g = segment()
    G = lambda t: 1 / (t - 1.25)
    dd = faber_coefficients(G, g, 30, 1.5, 256, dps=30)
    mp = faber_coefficients(G, g, 30, 1.5, 256, dps=30, engine="mpmath")
    with mpmath.workdps(30):
        diff = max(abs(a - b) for a, b in zip(dd.values, mp.values))
    assert diff < 1e-28


def test_series_converges():
    g = segment()
    G = lambda t: 1 / (t - 1.25)
    c = faber_coefficients(G, g, 40, 1.5, 512)
    B = faber_basis(g, 40)
    z = np.linspace(-1, 1, 7)
    approx = evaluate_faber_series(c, B, z, 41)
    assert np.max(np.abs(approx - G(z))) < 1e-10
    assert evaluate_faber_series(c, B, 0.3, 0) == 0


def test_preconditions():
    g = disk()
    with pytest.raises(ValueError):
        faber_coefficients(lambda t: t, g, 4, 1.0, 64)
    with pytest.raises(ValueError):
        faber_coefficients(lambda t: t, g, 40, 2.0, 64)
    with pytest.raises(QuadratureError, match="node"), np.errstate(all="ignore"):
        faber_coefficients(lambda t: 1 / (t - 2), g, 4, 2.0, 64)
    with pytest.raises(ValueError):
        faber_basis(g, -1)


def test_engine_resolution():
    assert resolve_engine(None) == "double"
    assert resolve_engine(30) == "dd"
    assert resolve_engine(40) == "mpmath"
    for bad in [(None, "dd"), (20, "double"), (40, "dd"), (20, "quad")]:
        with pytest.raises(ValueError):
            resolve_engine(*bad)


def test_estimate_rho0_segment():
    g = segment()
    c = faber_coefficients(lambda t: 1 / (t - 1.25), g, 30, 1.4, 4096)
    assert estimate_rho0(c, (5, 25)) == pytest.approx(2.0, abs=0.05)


def test_estimate_rho0_entire_function_indeterminate():
    c = FaberCoefficients(np.array([1.0, 0.5, 0, 0, 0, 0]), 2.0, 64)
    with pytest.raises(IndeterminateRateError):
        estimate_rho0(c, (2, 5))
