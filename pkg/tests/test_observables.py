"""Observable extraction: correlators, spectra, density matrices, populations."""

import numpy as np
import pytest

from hseom import (
    BathExpansion,
    ConfigError,
    ContourEngine,
    DenseOperator,
    EquilibrationWarning,
    LocalizedWithTransform,
    MixedState,
    PureState,
    annealing_populations,
    build_eta,
    build_space,
    closed_system_propagate,
    half_fourier,
    operator_expectations,
    pspin_annealing,
    pure_dephasing,
    rdm_trajectory,
    reduced_density_matrix,
    response_function,
    spin_boson,
    two_body_correlation,
    uniform_superposition_transform,
)
from hseom.models import SIGMA_X, SIGMA_Z
from hseom.observables import CorrelationResult


def _zero_expansion(K=2, Omega=3.0):
    phi0 = np.zeros(K)
    phi0[0] = 1.0
    return BathExpansion(Omega=Omega, K=K, c=np.zeros(K, dtype=complex),
                         eta=build_eta(K, Omega), phi_at_zero=phi0)


def _closed_engine(model, n_max=1):
    return ContourEngine(build_space(2, n_max), _zero_expansion(), model)


def test_identity_correlator_is_trace(small_engine):
    psi0 = np.array([0.6, 0.8], dtype=complex)
    val = two_body_correlation(small_engine, None, None, 0.8, 0.3,
                               PureState(psi0), 0.01)
    assert abs(val - 1.0) < 1e-6


def test_localized_and_general_routes_agree(small_engine):
    C = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    sx, sz = DenseOperator(SIGMA_X), DenseOperator(SIGMA_Z)
    a = two_body_correlation(small_engine, sx, sz, 0.6, 0.2,
                             LocalizedWithTransform(0, C), 0.01)
    b = two_body_correlation(small_engine, sx, sz, 0.6, 0.2,
                             PureState(C[:, 0].astype(complex)), 0.01)
    assert abs(a - b) < 1e-10


def test_closed_limit_matches_two_level_oracle():
    model = spin_boson(1.7)
    engine = _closed_engine(model)
    ket1 = np.array([0.0, 1.0], dtype=complex)
    t = 1.2
    got = two_body_correlation(engine, DenseOperator(SIGMA_X),
                               DenseOperator(SIGMA_X), t, 0.0,
                               PureState(ket1), 0.002)
    # tr{sx(t) |1><1| sx} via the eigendecomposition oracle
    left = closed_system_propagate(model, SIGMA_X @ ket1, t)
    right = SIGMA_X @ closed_system_propagate(model, ket1, t)
    exact = np.vdot(left, right)
    assert abs(got - exact) < 1e-8


def test_expectations_identity_and_projector(small_engine):
    psi0 = np.array([0.0, 1.0], dtype=complex)
    proj1 = np.zeros((2, 2), dtype=complex)
    proj1[1, 1] = 1.0
    vals, stats = operator_expectations(
        small_engine, 0.5, PureState(psi0), 0.01,
        [None, DenseOperator(proj1)])
    assert abs(vals[0] - 1.0) < 1e-6          # trace preserved
    assert 0.0 < vals[1].real < 1.0           # population has moved
    assert stats["c1_max_abs"] >= 1.0

    at_zero, _ = operator_expectations(
        small_engine, 0.0, PureState(psi0), 0.01, [DenseOperator(SIGMA_Z)])
    assert abs(at_zero[0] - 1.0) < 1e-12      # <sigma_z> of |1> is +1


def test_dephasing_keeps_populations(small_expansion):
    engine = ContourEngine(build_space(4, 3), small_expansion,
                           pure_dephasing(1.0))
    plus = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
    times, rho = rdm_trajectory(engine, PureState(plus), 0.01,
                                [0.5, 1.0])
    assert np.abs(rho[:, 0, 0] - 0.5).max() < 1e-8
    assert np.abs(rho[:, 1, 1] - 0.5).max() < 1e-8
    # coherence must genuinely decay, not just wobble
    assert abs(rho[1, 0, 1]) < abs(rho[0, 0, 1]) < 0.5


def test_rdm_at_zero_returns_initial_density(small_engine):
    psi0 = np.array([0.6, 0.8j], dtype=complex)
    rho = reduced_density_matrix(small_engine, 0.0, PureState(psi0), 0.01)
    assert np.abs(rho - np.outer(psi0, psi0.conj())).max() < 1e-10

    mix = MixedState([(0.25, np.array([1.0, 0.0], dtype=complex)),
                      (0.75, np.array([0.0, 1.0], dtype=complex))])
    rho = reduced_density_matrix(small_engine, 0.0, mix, 0.01)
    assert np.abs(rho - np.diag([0.25, 0.75])).max() < 1e-10


def test_rdm_trajectory_structure(small_engine):
    plus = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
    times, rho = rdm_trajectory(small_engine, PureState(plus), 0.01,
                                [0.25, 0.5, 1.0])
    assert times.shape == (3,) and rho.shape == (3, 2, 2)
    for r in rho:
        assert np.abs(r - r.conj().T).max() < 1e-8
        assert abs(np.trace(r) - 1.0) < 1e-8
    single = reduced_density_matrix(small_engine, 0.5, PureState(plus), 0.01)
    assert np.abs(rho[1] - single).max() < 1e-10


def test_rdm_trajectory_rejects_schedules(small_expansion):
    model = pspin_annealing(2, Gamma=1.0, p=3, t_f=1.0)
    engine = ContourEngine(build_space(4, 1), small_expansion, model)
    init = uniform_superposition_transform(2)
    with pytest.raises(ConfigError):
        rdm_trajectory(engine, init, 0.01, [0.5])
    with pytest.raises(ConfigError):
        rdm_trajectory(ContourEngine(build_space(4, 1), small_expansion,
                                     spin_boson(1.0)),
                       PureState(np.array([1.0, 0.0])), 0.01, [0.5, 0.5])


def test_response_closed_limit_peaks_at_omega0():
    w0 = 2.0
    engine = _closed_engine(spin_boson(w0), n_max=0)
    taus = np.arange(0.0, 12.0 + 1e-12, 0.01)
    result = response_function(engine, taus, t0=1.0, dt=0.01)
    # |1><1| is an eigenstate, so the correlator is the bare phase e^{i w0 tau}
    assert np.abs(result.values - np.exp(1j * w0 * taus)).max() < 1e-8
    assert abs(result.metadata["drift"]) < 1e-10

    omegas = np.arange(0.5 * w0, 1.5 * w0 + 1e-12, 0.01 * w0)
    spec = half_fourier(result, omegas, part="imag")
    peak = omegas[np.abs(spec.values.imag).argmax()]
    assert abs(peak - w0) < 1e-9


def test_response_warns_when_still_drifting(small_engine):
    taus = np.arange(0.0, 0.5 + 1e-12, 0.05)
    with pytest.warns(EquilibrationWarning):
        response_function(small_engine, taus, t0=0.5, dt=0.05,
                          drift_tolerance=1e-12)


def test_response_grid_validation(small_engine):
    with pytest.raises(ConfigError):
        response_function(small_engine, [0.1, 0.2, 0.3], t0=1.0, dt=0.05)
    with pytest.raises(ConfigError):
        response_function(small_engine, [0.0, 0.1, 0.3], t0=1.0, dt=0.05)
    with pytest.raises(ConfigError):
        response_function(small_engine, [0.0], t0=1.0, dt=0.05)


def test_half_fourier_exponential_integral():
    ts = np.arange(0.0, 40.0 + 1e-12, 0.002)
    result = CorrelationResult(times=ts, values=np.exp(-ts).astype(complex))
    spec = half_fourier(result, [0.0])
    assert abs(spec.values[0] - 1.0) < 1e-6


def test_half_fourier_lorentzian_extremum():
    w0, eta = 2.0, 0.05
    ts = np.arange(0.0, 200.0 + 1e-12, 0.01)
    result = CorrelationResult(
        times=ts, values=(np.sin(w0 * ts) * np.exp(-eta * ts)).astype(complex))
    omegas = np.arange(0.5 * w0, 1.5 * w0 + 1e-12, 0.005 * w0)
    spec = half_fourier(result, omegas)
    extremum = omegas[np.abs(spec.values.imag).argmax()]
    assert abs(extremum - w0) < 0.02 * w0


def test_half_fourier_zero_and_metadata():
    ts = np.arange(0.0, 1.0 + 1e-12, 0.1)
    zero = CorrelationResult(times=ts, values=np.zeros(ts.size, complex))
    spec = half_fourier(zero, [0.0, 1.0, 2.0], window_time=0.5, part="real")
    assert np.abs(spec.values).max() == 0.0
    assert spec.metadata["window_time"] == 0.5
    assert spec.metadata["part"] == "real"
    assert spec.metadata["horizon"] == 1.0
    with pytest.raises(ValueError):
        half_fourier(zero, [0.0], part="modulus")


def test_half_fourier_window_damps_ringing():
    ts = np.arange(0.0, 20.0 + 1e-12, 0.01)
    result = CorrelationResult(times=ts,
                               values=np.sin(3.0 * ts).astype(complex))
    omegas = np.array([2.0, 3.0, 4.0])
    bare = half_fourier(result, omegas)
    windowed = half_fourier(result, omegas, window_time=5.0)
    assert not np.allclose(bare.values, windowed.values)


def test_annealing_starts_at_uniform_overlap(small_expansion):
    model = pspin_annealing(2, Gamma=1.0, p=3, t_f=1.0)
    engine = ContourEngine(build_space(4, 1), small_expansion, model)
    trace = annealing_populations(engine, uniform_superposition_transform(2),
                                  0.01, [0.0, 0.5, 1.0])
    assert abs(trace.p_ground[0] - 0.25) < 1e-10   # 1/2^N
    assert np.abs(trace.trace - 1.0).max() < 1e-6
    # the Ncal single-flip states are degenerate: the summed population is
    # Ncal times the representative at the symmetric initial condition
    assert abs(trace.p_excited_sum[0] - 2.0 * trace.p_excited_rep[0]) < 1e-10


def test_annealing_adiabatic_closed_limit():
    # slow closed-system schedule ends in the target ground state
    model = pspin_annealing(2, Gamma=1.0, p=3, t_f=30.0)
    engine = ContourEngine(build_space(2, 0), _zero_expansion(), model)
    trace = annealing_populations(engine, uniform_superposition_transform(2),
                                  0.01, [30.0])
    assert trace.p_ground[0] > 0.95


def test_annealing_coupling_helps_at_p3(small_expansion):
    # four qubits, two couplings: the intermediate bath must not hurt
    results = {}
    for zeta in (0.01, 0.1):
        from hseom import BathSpec, OhmicCircular, compute_coefficients
        spec = BathSpec(OhmicCircular(zeta=zeta, nu=3.0), np.inf, 3.0, 5)
        engine = ContourEngine(build_space(5, 2), compute_coefficients(spec),
                               pspin_annealing(4, Gamma=1.0, p=3, t_f=1.0))
        trace = annealing_populations(
            engine, uniform_superposition_transform(4), 0.01, [1.0])
        results[zeta] = trace.p_ground[0]
    assert results[0.1] >= results[0.01]


def test_annealing_rejects_fixed_models(small_engine):
    with pytest.raises(ConfigError):
        annealing_populations(small_engine,
                              PureState(np.array([1.0, 0.0])), 0.01, [0.5])
