import math

import numpy as np
import pytest
from scipy import integrate, special

from hseom import (INFINITE, BathSpec, ConfigError, ExpansionWarning,
                   OhmicCircular, OhmicExponential, alpha_quadrature,
                   alpha_reconstruct, build_eta, compute_coefficients,
                   jacobi_anger_residual, minimal_K, read_expansion,
                   reconstruction_error, tail_mass, write_expansion)


def _circular(zeta=0.35, nu=6.0, beta=3.0, K=20):
    return BathSpec(OhmicCircular(zeta=zeta, nu=nu), beta, nu, K)


@pytest.mark.parametrize("zeta,nu,beta", [
    (0.35, 6.0, 3.0),
    (0.1, 3.0, 0.7),
    (1.3, 2.0, INFINITE),
])
def test_circular_odd_coefficients_are_analytic(zeta, nu, beta):
    exp = compute_coefficients(_circular(zeta, nu, beta, 16))
    target = -1j * math.pi * zeta * nu * nu / 8.0
    assert abs(exp.c[1] - target) < 1e-8
    assert abs(exp.c[3] - target) < 1e-8
    for k in range(5, 16, 2):
        assert abs(exp.c[k]) < 1e-8


def test_odd_coefficients_do_not_depend_on_temperature():
    # the sinh/sinh cancellation in the odd sector is exact
    exp_cold = compute_coefficients(_circular(beta=INFINITE))
    exp_warm = compute_coefficients(_circular(beta=0.5))
    assert np.abs(exp_cold.c[1::2] - exp_warm.c[1::2]).max() < 1e-8
    # while the even sector definitely does
    assert np.abs(exp_cold.c[0::2] - exp_warm.c[0::2]).max() > 1e-3


def test_high_temperature_real_part_limit():
    # Re alpha(t) -> (pi zeta nu / 2 beta) [J_0 + J_2](nu t) as beta -> 0
    zeta, nu, beta = 0.2, 3.0, 1e-4
    spec = _circular(zeta, nu, beta, 8)
    for t in (0.3, 1.1):
        expected = (math.pi * zeta * nu / (2.0 * beta)) * (
            special.jv(0, nu * t) + special.jv(2, nu * t))
        got = alpha_quadrature(spec, t).real
        assert abs(got / expected - 1.0) < 1e-5


@pytest.mark.parametrize("beta", [3.0, INFINITE])
def test_reconstruction_matches_quadrature(beta):
    spec = _circular(beta=beta)
    exp = compute_coefficients(spec)
    err = reconstruction_error(spec, exp, np.linspace(0.0, 2.0, 21))
    assert err < 1e-4


def test_reconstruction_improves_with_K():
    grid = np.linspace(0.0, 2.0, 11)
    errs = []
    for K in (6, 10, 14):
        spec = _circular(K=K)
        errs.append(reconstruction_error(
            spec, compute_coefficients(spec), grid))
    assert errs[0] > errs[1] > errs[2]


def test_c0_equals_alpha_at_zero():
    spec = _circular()
    exp = compute_coefficients(spec)
    assert abs(exp.c[0] - alpha_quadrature(spec, 0.0)) < 1e-8 * abs(exp.c[0])


def test_alpha_reconstruct_scalar_and_array_agree():
    exp = compute_coefficients(_circular())
    ts = np.array([0.0, 0.4, 1.7])
    arr = alpha_reconstruct(exp, ts)
    # the ladder's start order depends on max|z|, so agreement is close
    # rather than bitwise
    for i, t in enumerate(ts):
        assert abs(arr[i] - alpha_reconstruct(exp, float(t))) < 1e-12


def test_zero_temperature_is_the_large_beta_limit():
    dens = OhmicCircular(zeta=0.3, nu=2.0)
    cold = BathSpec(dens, INFINITE, 2.0, 10)
    nearly = BathSpec(dens, 1e4, 2.0, 10)
    for t in (0.0, 0.8):
        a = alpha_quadrature(cold, t)
        b = alpha_quadrature(nearly, t)
        assert abs(a - b) < 1e-4 * abs(a)


def test_eta_matrix_pattern():
    eta = build_eta(5, 2.0).toarray()
    expected = np.array([
        [0.0, -2.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, -1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0, 0.0, -1.0],
        [0.0, 0.0, 0.0, 1.0, 0.0],
    ])
    assert np.array_equal(eta, expected)


def test_plane_wave_residual_drops_with_K():
    r = [jacobi_anger_residual(1.0, 2.0, K, 6.0) for K in (8, 16, 32)]
    assert r[0] > r[1] > r[2]
    assert r[2] < 1e-9


def test_minimal_K_is_sufficient_and_tight():
    K = minimal_K(6.0, 2.0)
    assert jacobi_anger_residual(1.0, 2.0, K, 6.0) <= 1e-6
    assert jacobi_anger_residual(1.0, 2.0, K - 2, 6.0) > 1e-6


def test_tail_mass_circular_is_zero():
    assert tail_mass(_circular()) == 0.0


def test_tail_mass_exponential_against_direct_quadrature():
    # independent route: same defining integrals, coded from scratch here
    eta, gamma, beta, Om = 0.35, 6.0, 3.0, 20.0

    def occupied(w):
        with np.errstate(over="ignore"):
            return eta * w * np.exp(-abs(w) / gamma) / (
                1.0 - np.exp(-beta * w))

    inner, _ = integrate.quad(occupied, -Om, Om, points=[0.0], limit=200)
    left, _ = integrate.quad(occupied, -np.inf, -Om, limit=200)
    right, _ = integrate.quad(occupied, Om, np.inf, limit=200)
    expected = (left + right) / (left + right + inner)
    spec = BathSpec(OhmicExponential(eta=eta, gamma=gamma), beta, Om, 40)
    assert abs(tail_mass(spec) - expected) < 1e-8
    # with the window this wide the missed weight is small but real
    assert 0.001 < expected < 0.2


def test_expansion_file_round_trip(tmp_path):
    spec = _circular(K=12)
    exp = compute_coefficients(spec)
    path = tmp_path / "expansion.txt"
    write_expansion(path, spec, exp)
    back_spec, back = read_expansion(path)
    assert back_spec == spec
    assert back.K == exp.K
    assert back.Omega == exp.Omega
    assert np.array_equal(back.c, exp.c)


def test_expansion_warning_channel():
    # the t = 0 self-check only sees quadrature inconsistency (c_0 and
    # alpha(0) are the same integral); horizon adequacy is the job of
    # jacobi_anger_residual.  Exercise the channel at zero tolerance.
    with pytest.warns(ExpansionWarning):
        compute_coefficients(_circular(K=8), rel_tol=0.0)


@pytest.mark.parametrize("build", [
    lambda: BathSpec(OhmicCircular(zeta=0.3, nu=2.0), 3.0, 3.0, 10),
    lambda: BathSpec(OhmicExponential(eta=0.3, gamma=6.0), 3.0, 5.0, 10),
    lambda: BathSpec(OhmicCircular(zeta=0.3, nu=2.0), -1.0, 2.0, 10),
    lambda: BathSpec(OhmicCircular(zeta=0.3, nu=2.0), 3.0, 2.0, 1),
    lambda: OhmicCircular(zeta=-0.1, nu=2.0),
    lambda: OhmicExponential(eta=0.1, gamma=0.0),
])
def test_invalid_bath_parameters_are_rejected(build):
    with pytest.raises(ConfigError):
        build()
