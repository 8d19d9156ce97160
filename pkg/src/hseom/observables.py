"""Physical outputs assembled from contour runs.

Every quantity here reduces to the same primitive: propagate forward to the
turning point, insert an operator, return along the backward branch with a
possible second insertion, and read an inner product off the final physical
row.  The helpers differ only in which operators go in, how many backward
runs share one forward sweep, and how results are averaged over the initial
mixture.
"""

from __future__ import annotations

import dataclasses
import warnings
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import ContourEngine, ContourPlan, WaveStack, _GRID_TOL
from .errors import ConfigError, EquilibrationWarning
from .models import (DenseOperator, InitialState, LocalizedWithTransform,
                     Operator, SIGMA_X)

__all__ = [
    "CorrelationResult", "Spectrum", "PopulationTrace",
    "two_body_correlation", "operator_expectations",
    "reduced_density_matrix", "rdm_trajectory", "response_function",
    "half_fourier", "annealing_populations",
]


@dataclasses.dataclass(eq=False)
class CorrelationResult:
    """A correlation series on a strictly increasing time grid."""

    times: np.ndarray
    values: np.ndarray
    metadata: Dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have matching shapes")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("time grid must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("correlation values must be finite")


@dataclasses.dataclass(eq=False)
class Spectrum:
    omegas: np.ndarray
    values: np.ndarray
    metadata: Dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        self.omegas = np.asarray(self.omegas, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("spectrum values must be finite")


@dataclasses.dataclass(eq=False)
class PopulationTrace:
    """Populations of the target-Hamiltonian eigenstates along a schedule."""

    times: np.ndarray
    p_ground: np.ndarray
    p_excited_rep: np.ndarray
    p_excited_sum: np.ndarray
    trace: np.ndarray
    metadata: Dict = dataclasses.field(default_factory=dict)


def _steps_on_grid(value: float, dt: float, what: str) -> int:
    step = int(round(value / dt))
    if abs(step * dt - value) > _GRID_TOL * max(1.0, value):
        raise ConfigError(f"{what} = {value} is off the dt = {dt} grid",
                          section="plan")
    return step


def two_body_correlation(engine: ContourEngine, A: Optional[Operator],
                         B: Optional[Operator], t: float, t_prime: float,
                         init: InitialState, dt: float) -> complex:
    """tr{A(t) rho_S(0) B(t')} through the full contour.

    A localized initial state runs the contour once, from C|k>.  Any other
    initial state runs it once per populated basis column of rho_S(0) and
    sums the diagonal overlaps; both routes must agree, which the test
    suite uses as a cross-check of the transformation-matrix identity.
    ``A`` is inserted at the turning point s = t and ``B`` at s = 2t - t';
    pass None for either to mean the identity.
    """
    plan = ContourPlan.correlation(t=t, t_prime=t_prime, dt=dt, A=A, B=B)
    if isinstance(init, LocalizedWithTransform):
        v = init.initial_vector()
        traj = engine.run(plan, WaveStack(engine.initial_stack(v), 0.0, None))
        return complex(np.vdot(v, traj.final.data[0]))
    rho0 = init.density()
    total = 0.0 + 0.0j
    for col in range(engine.dim):
        start = rho0[:, col]
        if np.abs(start).max() == 0.0:
            continue
        traj = engine.run(plan,
                          WaveStack(engine.initial_stack(start), 0.0, None))
        total += traj.final.data[0][col]
    return complex(total)


def operator_expectations(engine: ContourEngine, t: float,
                          init: InitialState, dt: float,
                          operators: Sequence[Optional[Operator]]):
    """tr{A_i(t) rho(t)} for several A_i sharing one forward sweep.

    One C1 run per initial-state component; every requested operator then
    rides its own backward column (batched on a common clock).  None means
    the identity, i.e. the trace.  Returns (values, stats dict).
    """
    n = _steps_on_grid(t, dt, "t")
    n_ops = len(operators)
    total = np.zeros(n_ops, dtype=complex)
    max_fwd = max_bwd = 0.0
    for weight, v in init.components():
        y = engine.initial_stack(v).ravel()
        if n > 0:
            y, _, m1 = engine.integrate_span(y, 0, n, dt, +1.0,
                                             tau_of=lambda s: s)
            max_fwd = max(max_fwd, m1)
        cols = np.empty((y.size, n_ops), dtype=complex)
        for a, op in enumerate(operators):
            cols[:, a] = y if op is None else engine.apply_all_rows(y, op)
        if n == 0:
            vals = np.array([np.vdot(v, cols[:engine.dim, a])
                             for a in range(n_ops)])
        elif engine.model.time_dependent:
            yb, _, m2 = engine.integrate_span(
                cols, n, n, dt, -1.0, tau_of=lambda s: 2.0 * t - s)
            max_bwd = max(max_bwd, m2)
            vals = np.array([np.vdot(v, yb[:engine.dim, a])
                             for a in range(n_ops)])
        else:
            bras = np.tile(v, (n_ops, 1))
            vals, m2 = engine.backward_batch(
                cols, np.full(n_ops, n), dt, bras=bras)
            max_bwd = max(max_bwd, m2)
        total += weight * vals
    return total, {"c1_max_abs": max_fwd, "c2_max_abs": max_bwd}


def reduced_density_matrix(engine: ContourEngine, t: float,
                           init: InitialState, dt: float) -> np.ndarray:
    """rho_S(t), element by element, sharing the forward sweep.

    rho_ij comes from inserting |j><i| at the turning point with the
    identity on the way back.  All dim^2 elements ride one backward batch
    per initial-state component.
    """
    d = engine.dim
    ops = []
    for i in range(d):
        for j in range(d):
            mat = np.zeros((d, d), dtype=complex)
            mat[j, i] = 1.0
            ops.append(DenseOperator(mat))
    vals, _ = operator_expectations(engine, t, init, dt, ops)
    return vals.reshape(d, d)


def rdm_trajectory(engine: ContourEngine, init: InitialState, dt: float,
                   record_times) -> Tuple[np.ndarray, np.ndarray]:
    """rho_S(t) on a grid of record times, time-independent models only.

    One forward sweep per initial-state component serves every record time;
    all dim^2 elements of all record times then share a single backward
    batch on the common elapsed clock, longest horizons first.  Returns
    (times, rho) with rho of shape [n_times, dim, dim].
    """
    if engine.model.time_dependent:
        raise ConfigError("rdm_trajectory needs a time-independent model; "
                          "use annealing_populations for schedules",
                          section="model")
    times = np.asarray(record_times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ConfigError("record times must be strictly increasing",
                          section="plan", key="record_times")
    steps = [_steps_on_grid(t, dt, "record time") for t in times]
    d = engine.dim
    elem_ops = []
    for i in range(d):
        for j in range(d):
            mat = np.zeros((d, d), dtype=complex)
            mat[j, i] = 1.0
            elem_ops.append(DenseOperator(mat))

    rho = np.zeros((times.size, d, d), dtype=complex)
    for weight, v in init.components():
        y = engine.initial_stack(v).ravel()
        snap_steps = {step: step for step in steps}
        _, snaps, _ = engine.integrate_span(
            y, 0, max(steps), dt, +1.0, tau_of=lambda s: s,
            snap_steps=snap_steps)
        jobs = []  # (end step, record index, element index)
        for r, step_r in enumerate(steps):
            for e in range(d * d):
                jobs.append((step_r, r, e))
        jobs.sort(key=lambda job: -job[0])
        X = np.empty((y.size, len(jobs)), dtype=complex)
        ends = np.empty(len(jobs), dtype=int)
        for col, (end, r, e) in enumerate(jobs):
            X[:, col] = engine.apply_all_rows(snaps[end], elem_ops[e])
            ends[col] = end
        bras = np.tile(v, (len(jobs), 1))
        vals, _ = engine.backward_batch(X, ends, dt, bras=bras)
        for col, (end, r, e) in enumerate(jobs):
            rho[r, e // d, e % d] += weight * vals[col]
    return times, rho


def response_function(engine: ContourEngine, taus, t0: float, dt: float,
                      *, drift_tolerance: float = 0.05) -> CorrelationResult:
    """First-order response of the dissipative qubit after equilibration.

    Runs once forward to t0 + max(tau) from the localized state |1><1|,
    snapshots at every t0 + tau_m, applies sigma_x there, and returns each
    column along the backward branch with the second sigma_x inserted at
    elapsed time tau_m.  The result values are the complex correlators
    Psi(t0 + tau; t0); the physical response is their imaginary part.

    Two extra columns measure the population P_1 at 0.8 t0 and t0; their
    difference is the equilibration drift, recorded in the metadata and
    warned about above ``drift_tolerance``.
    """
    if engine.dim != 2 or engine.model.time_dependent:
        raise ConfigError("response_function expects the time-independent "
                          "two-level model", section="model")
    taus = np.asarray(taus, dtype=float)
    if taus.ndim != 1 or taus.size < 2:
        raise ConfigError("need a 1-D grid of at least two lag times",
                          section="plan", key="taus")
    spacing = np.diff(taus)
    if np.any(spacing <= 0) or np.abs(spacing - spacing[0]).max() > 1e-9:
        raise ConfigError("lag grid must be uniform and increasing",
                          section="plan", key="taus")
    if taus[0] != 0.0:
        raise ConfigError("lag grid must start at 0", section="plan",
                          key="taus")
    n0 = _steps_on_grid(t0, dt, "t0")
    lag_steps = np.array([_steps_on_grid(tau, dt, "tau") for tau in taus])
    n_drift = int(round(0.8 * n0))

    sx = DenseOperator(SIGMA_X)
    proj1 = np.zeros((2, 2), dtype=complex)
    proj1[1, 1] = 1.0
    proj1 = DenseOperator(proj1)
    ket1 = np.array([0.0, 1.0], dtype=complex)

    # forward sweep with a snapshot wherever some backward run turns around
    need = sorted({n0 + int(ls) for ls in lag_steps} | {n_drift, n0})
    snap_steps = {step: step for step in need}
    y0 = engine.initial_stack(ket1).ravel()
    nfwd = n0 + int(lag_steps[-1])
    _, snaps, max_fwd = engine.integrate_span(
        y0, 0, nfwd, dt, +1.0, tau_of=lambda s: s, snap_steps=snap_steps)

    # one backward column per job: (end step, turning op, B step, tag)
    jobs = [(n0 + int(ls), sx, int(ls), ("resp", m))
            for m, ls in enumerate(lag_steps)]
    jobs.append((n_drift, proj1, None, ("drift", 0)))
    jobs.append((n0, proj1, None, ("drift", 1)))
    jobs.sort(key=lambda job: -job[0])

    R = len(jobs)
    X = np.empty((y0.size, R), dtype=complex)
    steps = np.empty(R, dtype=int)
    bras = np.tile(ket1, (R, 1))
    events = []
    tags = []
    for col, (end, A, bstep, tag) in enumerate(jobs):
        X[:, col] = engine.apply_all_rows(snaps[end], A)
        steps[col] = end
        if bstep is not None:
            events.append((bstep, col, sx))
        tags.append(tag)

    out, max_bwd = engine.backward_batch(X, steps, dt, events=events,
                                         bras=bras)
    psi = np.empty(len(taus), dtype=complex)
    drift_vals = {}
    for col, tag in enumerate(tags):
        if tag[0] == "resp":
            psi[tag[1]] = out[col]
        else:
            drift_vals[tag[1]] = out[col].real
    drift = abs(drift_vals[1] - drift_vals[0])
    if drift > drift_tolerance:
        warnings.warn(
            f"populations still drifting at t0 = {t0}: |dP| = {drift:.3e} "
            f"over the last fifth of the settling run", EquilibrationWarning,
            stacklevel=2)
    meta = {"t0": t0, "dt": dt, "drift": float(drift),
            "p1_at_t0": float(drift_vals[1]),
            "c1_max_abs": float(max_fwd), "c2_max_abs": float(max_bwd)}
    return CorrelationResult(times=taus, values=psi, metadata=meta)


def half_fourier(result: CorrelationResult, omega_grid, *,
                 window_time: Optional[float] = None,
                 part: Optional[str] = None) -> Spectrum:
    """Trapezoidal int_0^T dt e^{-i omega t} f(t) w(t) on the result grid.

    ``part`` picks f from the stored values: None uses them as they are,
    "real"/"imag" select a component (the response function is the
    imaginary part of the stored correlator).  ``window_time`` switches on
    the exponential window w(t) = e^{-t/T_w} against finite-horizon
    ringing; default is no window.  Window and part are recorded in the
    spectrum metadata.
    """
    ts = result.times
    f = result.values
    if part == "imag":
        f = f.imag.astype(complex)
    elif part == "real":
        f = f.real.astype(complex)
    elif part is not None:
        raise ValueError("part must be None, 'real', or 'imag'")
    if window_time is not None:
        f = f * np.exp(-ts / window_time)
    omegas = np.asarray(omega_grid, dtype=float)
    weights = np.ones(ts.size)
    weights[0] = weights[-1] = 0.5
    dt = ts[1] - ts[0]
    vals = (weights * f * np.exp(-1j * np.outer(omegas, ts))).sum(axis=1) * dt
    return Spectrum(omegas=omegas, values=vals,
                    metadata={"window_time": window_time, "part": part,
                              "horizon": float(ts[-1])})


def annealing_populations(engine: ContourEngine, init: InitialState,
                          dt: float, record_times, *,
                          cluster_tol: float = 1e-8) -> PopulationTrace:
    """Populations of the target ground and first-excited states vs time.

    The projectors are fixed: the schedule's end-point Hamiltonian H(t_f)
    is diagonalized once and the populations are measured against its
    ground level and its first excited level (one representative state and
    the degenerate cluster summed; for the p-spin target the cluster holds
    the Ncal single-flip states and the two conventions differ).  At t = 0
    the uniform superposition gives P_ground = 1/2^Ncal.  A fourth identity
    column tracks the trace.  The forward sweep is shared incrementally
    across record times; each record time runs its own backward branch
    because the schedule makes the generator time-dependent.
    """
    if not engine.model.time_dependent:
        raise ConfigError("annealing_populations expects a scheduled model",
                          section="model")
    times = np.asarray(record_times, dtype=float)
    if np.any(np.diff(times) <= 0):
        raise ConfigError("record times must be strictly increasing",
                          section="plan", key="record_times")
    steps = [_steps_on_grid(t, dt, "record time") for t in times]
    d = engine.dim

    target = engine.model.hamiltonian_at(engine.model.t_f).to_dense()
    energies, states = np.linalg.eigh(target)
    scale = max(1.0, float(energies[-1] - energies[0]))
    ground_cluster = np.nonzero(energies <= energies[0]
                                + cluster_tol * scale)[0]
    block = states[:, ground_cluster]
    ops: List[Optional[Operator]] = [DenseOperator(block @ block.conj().T)]
    above = np.nonzero(energies > energies[0] + cluster_tol * scale)[0]
    if above.size:
        e1 = energies[above[0]]
        cluster = np.nonzero(np.abs(energies - e1) <= cluster_tol * scale)[0]
        rep = states[:, cluster[0]]
        ops.append(DenseOperator(np.outer(rep, rep.conj())))
        block = states[:, cluster]
        ops.append(DenseOperator(block @ block.conj().T))
    else:
        ops.extend([None, None])
    ops.append(None)  # trace column

    p_g = np.zeros(times.size)
    p_rep = np.zeros(times.size)
    p_sum = np.zeros(times.size)
    trace = np.zeros(times.size)

    for weight, v in init.components():
        y = engine.initial_stack(v).ravel()
        prev = 0
        for r, step_r in enumerate(steps):
            if step_r > prev:
                y, _, _ = engine.integrate_span(
                    y, prev, step_r - prev, dt, +1.0, tau_of=lambda s: s)
                prev = step_r
            t_r = step_r * dt
            cols = np.empty((y.size, len(ops)), dtype=complex)
            for a, op in enumerate(ops):
                cols[:, a] = y if op is None else engine.apply_all_rows(y, op)
            if step_r == 0:
                vals = np.array([np.vdot(v, cols[:d, a])
                                 for a in range(len(ops))])
            else:
                yb, _, _ = engine.integrate_span(
                    cols, step_r, step_r, dt, -1.0,
                    tau_of=lambda s, tr=t_r: 2.0 * tr - s)
                vals = np.array([np.vdot(v, yb[:d, a])
                                 for a in range(len(ops))])
            p_g[r] += weight * vals[0].real
            if above.size:
                p_rep[r] += weight * vals[1].real
                p_sum[r] += weight * vals[2].real
            trace[r] += weight * vals[3].real

    return PopulationTrace(times=times, p_ground=p_g, p_excited_rep=p_rep,
                           p_excited_sum=p_sum, trace=trace,
                           metadata={"dt": dt, "cluster_tol": cluster_tol})
