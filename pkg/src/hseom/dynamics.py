"""Signed contour propagation of the hierarchy.

A run walks the contour parameter s from 0 to 2t: the forward branch C1
(s in [0, t], upper signs) followed by the backward branch C2 (s in (t, 2t],
lower signs, which flips the overall sign of the right-hand side).  The
physical clock folds back on C2: tau(s) = s on C1 and 2t - s on C2, so a
scheduled Hamiltonian retraces itself.

For one stack row per hierarchy index n, the derivative along s is

    d phi_n / ds = -+ i H(tau) phi_n
                   +- sum_{k,k'} eta_{k,k'} n_k phi_{n - e_k + e_k'}
                   -+ i V sum_k c_k phi_{n + e_k}
                   -+ i V n_0 phi_{n - e_0}

with indices outside the truncated space contributing zero.  The last term
is the k-sum over n_k phi_k(0) phi_{n - e_k} collapsed by phi_k(0) =
delta_{k0}; the code keeps the general phi_k(0) array.  All hierarchy-space
mixing is precomputed into two sparse matrices (exchange E, coupling B), so
one derivative costs three sparse matvecs plus the system operators.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from .bath import BathExpansion
from .errors import ConfigError, NumericalError
from .hierarchy import ABSENT, HierarchySpace
from .models import DenseOperator, Operator, SystemModel

__all__ = [
    "Branch", "WaveStack", "ContourPlan", "Snapshot", "Trajectory",
    "contour_clock", "build_coupling_matrices", "ContourEngine",
    "hseom_rhs", "propagate", "grid_dt", "default_dt",
]

_GRID_TOL = 1e-9


class Branch(enum.Enum):
    C1 = "C1"
    C2 = "C2"

    @property
    def sign(self) -> float:
        return 1.0 if self is Branch.C1 else -1.0


def contour_clock(s: float, t: float):
    """Fold the contour parameter onto the physical clock.

    Returns (tau, branch, sign); the turning point s = t belongs to C1.
    """
    tol = _GRID_TOL * max(1.0, t)
    if s < -tol or s > 2.0 * t + tol:
        raise ValueError(f"s = {s} outside the contour [0, {2.0 * t}]")
    if s <= t:
        return s, Branch.C1, 1.0
    return 2.0 * t - s, Branch.C2, -1.0


@dataclasses.dataclass(eq=False)
class WaveStack:
    """One row per hierarchy index; row 0 is the physical wave function."""

    data: np.ndarray   # complex [num_awf, dim]
    s: float
    branch: Branch


@dataclasses.dataclass(eq=False)
class Snapshot:
    s: float
    branch: Branch
    rwf: np.ndarray
    stack: Optional[np.ndarray] = None


@dataclasses.dataclass(eq=False)
class Trajectory:
    snapshots: List[Snapshot]
    final: WaveStack
    c1_max_abs: float
    c2_max_abs: float


def _step_of(s: float, dt: float, scale: float, what: str) -> int:
    step = int(round(s / dt))
    if abs(step * dt - s) > _GRID_TOL * max(1.0, scale):
        raise ConfigError(f"{what} at s = {s} is off the dt = {dt} grid",
                          section="plan")
    return step


@dataclasses.dataclass(eq=False)
class ContourPlan:
    """Step grid, operator insertions, and record times for one contour run.

    Insertions are (s, operator) pairs applied to every stack row when the
    integrator reaches that grid point; the defaults for a two-operator
    correlation are (t, A) and (2t - t', B).  All s values must sit on the
    dt grid, which is checked here rather than discovered mid-run.
    """

    t: float
    dt: float
    t_prime: float = 0.0
    insertions: Sequence[Tuple[float, Operator]] = ()
    record_times: Sequence[float] = ()
    record_full: bool = False

    def __post_init__(self):
        if self.t < 0:
            raise ConfigError("t must be >= 0", section="plan", key="t")
        if self.dt <= 0:
            raise ConfigError("dt must be positive", section="plan", key="dt")
        if not 0.0 <= self.t_prime <= self.t + _GRID_TOL * max(1.0, self.t):
            raise ConfigError("t_prime must lie in [0, t]", section="plan",
                              key="t_prime")
        self.n_half = _step_of(self.t, self.dt, self.t, "turning point")
        self.insertion_steps = []
        for s, op in sorted(self.insertions, key=lambda pair: pair[0]):
            if s < 0 or s > 2.0 * self.t + _GRID_TOL * max(1.0, self.t):
                raise ConfigError(f"insertion at s = {s} outside the contour",
                                  section="plan")
            self.insertion_steps.append(
                (_step_of(s, self.dt, self.t, "insertion"), op))
        self.record_steps = [
            _step_of(s, self.dt, self.t, "record time")
            for s in self.record_times]

    @classmethod
    def correlation(cls, t: float, t_prime: float, dt: float,
                    A: Optional[Operator] = None,
                    B: Optional[Operator] = None,
                    record_times: Sequence[float] = (),
                    record_full: bool = False) -> "ContourPlan":
        """Plan with A applied at the turning point and B at s = 2t - t'."""
        ins = []
        if A is not None:
            ins.append((t, A))
        if B is not None:
            ins.append((2.0 * t - t_prime, B))
        return cls(t=t, dt=dt, t_prime=t_prime, insertions=ins,
                   record_times=record_times, record_full=record_full)


def build_coupling_matrices(space: HierarchySpace,
                            expansion: BathExpansion):
    """The two sparse hierarchy-space matrices of the right-hand side.

    E[i, j] collects eta_{k,k'} n_k over the exchange moves ending at row i
    from row j; B[i, j] collects the raising coefficients c_k plus the
    phi_k(0)-weighted lowering, and is applied inside the coupling operator
    V.  Both are num_awf x num_awf and independent of time and branch.
    """
    if space.K != expansion.K:
        raise ConfigError(f"hierarchy K = {space.K} does not match "
                          f"expansion K = {expansion.K}", section="plan")
    M = space.num_indices
    n = space.indices
    rows, cols, vals = [], [], []
    eta = expansion.eta.tocoo()
    for k, kp, value in zip(eta.row, eta.col, eta.data):
        low = space.lower_table[k]
        src = np.nonzero(low != ABSENT)[0]
        if src.size == 0:
            continue
        dst = space.raise_table[kp, low[src]]
        rows.append(src)
        cols.append(dst)
        vals.append(value * n[src, k].astype(float))
    E = _coo_from_parts(vals, rows, cols, M).astype(complex)

    rows, cols, vals = [], [], []
    for k in range(space.K):
        up = space.raise_table[k]
        src = np.nonzero(up != ABSENT)[0]
        if src.size:
            rows.append(src)
            cols.append(up[src])
            vals.append(np.full(src.size, expansion.c[k]))
        if expansion.phi_at_zero[k] != 0.0:
            low = space.lower_table[k]
            src = np.nonzero(low != ABSENT)[0]
            if src.size:
                rows.append(src)
                cols.append(low[src])
                vals.append(expansion.phi_at_zero[k]
                            * n[src, k].astype(complex))
    B = _coo_from_parts(vals, rows, cols, M)
    E.sort_indices()
    B.sort_indices()
    return E, B


def _coo_from_parts(vals, rows, cols, M) -> sparse.csr_matrix:
    if not vals:  # N_max = 0 leaves no couplings at all
        return sparse.csr_matrix((M, M), dtype=complex)
    return sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(M, M)).tocsr()


class ContourEngine:
    """Precomputed machinery for repeated contour runs of one setup.

    For a time-independent model with dense system operators the whole
    right-hand side collapses to one sparse matrix on the flattened stack,
    G = kron(E, I) - i [kron(I, H) + kron(B, V)], and a derivative is a
    single matvec.  Otherwise the termwise path applies E, H(tau), and
    B-then-V per evaluation.  Both paths implement the same derivative; the
    termwise form is the definitional one exposed through
    :func:`hseom_rhs`.
    """

    def __init__(self, space: HierarchySpace, expansion: BathExpansion,
                 model: SystemModel):
        self.space = space
        self.expansion = expansion
        self.model = model
        self.num_awf = space.num_indices
        self.dim = model.dim
        self.E, self.B = build_coupling_matrices(space, expansion)
        self._ham0 = None if model.time_dependent \
            else model.hamiltonian_at(0.0)
        self._G = None
        if (not model.time_dependent
                and isinstance(self._ham0, DenseOperator)
                and isinstance(model.V, DenseOperator)
                and self.dim <= 64):
            Id = sparse.identity(self.dim, format="csr", dtype=complex)
            IM = sparse.identity(self.num_awf, format="csr", dtype=complex)
            G = (sparse.kron(self.E, Id)
                 - 1j * (sparse.kron(IM, sparse.csr_matrix(self._ham0.matrix))
                         + sparse.kron(self.B,
                                       sparse.csr_matrix(model.V.matrix))))
            self._G = G.tocsr()
            self._G.sort_indices()

    @property
    def flat_generator(self):
        """The precomputed sparse generator, or None on the termwise path."""
        return self._G

    # -- derivative -------------------------------------------------------

    def _hamiltonian(self, tau: float) -> Operator:
        return self._ham0 if self._ham0 is not None \
            else self.model.hamiltonian_at(tau)

    def rhs_stack(self, data: np.ndarray, tau: float, sign: float) -> np.ndarray:
        """Termwise derivative of a [num_awf, dim] stack."""
        ham = self._hamiltonian(tau)
        out = self.E @ data
        out -= 1j * ham.apply(data)
        out -= 1j * self.model.V.apply(self.B @ data)
        return sign * out

    def _deriv_flat(self, y: np.ndarray, tau: float, sign: float) -> np.ndarray:
        if self._G is not None:
            return sign * (self._G @ y)
        if y.ndim == 1:
            return self.rhs_stack(y.reshape(self.num_awf, self.dim),
                                  tau, sign).ravel()
        out = np.empty_like(y)
        for r in range(y.shape[1]):
            out[:, r] = self.rhs_stack(
                y[:, r].reshape(self.num_awf, self.dim), tau, sign).ravel()
        return out

    # -- integration ------------------------------------------------------

    def initial_stack(self, psi0: np.ndarray) -> np.ndarray:
        stack = np.zeros((self.num_awf, self.dim), dtype=complex)
        stack[0] = psi0
        return stack

    def apply_all_rows(self, y: np.ndarray, op: Operator) -> np.ndarray:
        """Apply a system operator to every hierarchy row of a flat state."""
        if y.ndim == 1:
            return op.apply(y.reshape(self.num_awf, self.dim)).ravel()
        out = np.empty_like(y)
        for r in range(y.shape[1]):
            out[:, r] = op.apply(
                y[:, r].reshape(self.num_awf, self.dim)).ravel()
        return out

    def _check_finite(self, y: np.ndarray, s: float) -> float:
        peak = float(np.abs(y).max())
        if not math.isfinite(peak):
            finite = np.abs(y)
            finite = finite[np.isfinite(finite)]
            largest = float(finite.max()) if finite.size else 0.0
            raise NumericalError(
                f"non-finite stack entry at s = {s}; largest finite "
                f"magnitude {largest:.3e}")
        return peak

    def integrate_span(self, y: np.ndarray, step0: int, n_steps: int,
                       dt: float, sign: float, tau_of=None,
                       events: Optional[Dict[int, List[Operator]]] = None,
                       snap_steps: Optional[Dict[int, object]] = None):
        """RK4 over n_steps from absolute grid step step0.

        ``tau_of`` maps the contour parameter s to the physical clock for
        scheduled Hamiltonians (ignored when time-independent).  Events and
        snapshots key on absolute steps; both fire at segment boundaries,
        events first.  Returns (y, snapshots dict, max |entry| seen).
        """
        y = y.astype(complex, copy=True)
        snaps = {}
        max_abs = 0.0
        for local in range(n_steps + 1):
            step = step0 + local
            s = step * dt
            if events is not None and step in events:
                for op in events[step]:
                    y = self.apply_all_rows(y, op)
            if snap_steps is not None and step in snap_steps:
                snaps[snap_steps[step]] = y.copy()
            max_abs = max(max_abs, self._check_finite(y, s))
            if local == n_steps:
                break
            if self._ham0 is not None or tau_of is None:
                t1 = t2 = t3 = 0.0
            else:
                t1, t2, t3 = tau_of(s), tau_of(s + 0.5 * dt), tau_of(s + dt)
            k1 = self._deriv_flat(y, t1, sign)
            k2 = self._deriv_flat(y + (0.5 * dt) * k1, t2, sign)
            k3 = self._deriv_flat(y + (0.5 * dt) * k2, t2, sign)
            k4 = self._deriv_flat(y + dt * k3, t3, sign)
            y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return y, snaps, max_abs

    def backward_batch(self, columns: np.ndarray, steps: np.ndarray,
                       dt: float,
                       events: Sequence[Tuple[int, int, Operator]] = (),
                       bras: Optional[np.ndarray] = None):
        """Many C2 runs on a shared elapsed clock, each with its own horizon.

        Columns must be ordered by ``steps`` non-increasing; finished
        columns are retired from the right so the live block stays
        contiguous.  ``events[(step, col, op)]`` applies op to all rows of
        one column at its elapsed step.  With ``bras`` of shape [R, dim]
        the return value is out[r] = <bras[r] | rwf of column r at its end>;
        otherwise the final columns themselves are returned.

        Only valid for time-independent models (a shared clock would
        otherwise mean different physical times per column).
        """
        if self.model.time_dependent:
            raise NumericalError(
                "backward_batch requires a time-independent model")
        R = columns.shape[1]
        steps = np.asarray(steps)
        if np.any(np.diff(steps) > 0):
            raise ValueError("columns must be sorted by steps descending")
        ev: Dict[int, List[Tuple[int, Operator]]] = {}
        for step, col, op in events:
            ev.setdefault(step, []).append((col, op))
        out = np.zeros(R, dtype=complex) if bras is not None else None
        finals = None if bras is not None else np.empty_like(columns)
        X = columns.astype(complex, copy=True)
        active = R
        max_abs = 0.0
        step = 0
        while active > 0:
            if step in ev:
                for col, op in ev[step]:
                    if col < active:
                        X[:, col] = self.apply_all_rows(X[:, col], op)
            while active > 0 and steps[active - 1] == step:
                col = active - 1
                if bras is not None:
                    out[col] = np.vdot(bras[col], X[:self.dim, col])
                else:
                    finals[:, col] = X[:, col]
                active -= 1
            if active == 0:
                break
            Xa = X[:, :active]
            max_abs = max(max_abs, self._check_finite(Xa, step * dt))
            k1 = self._deriv_flat(Xa, 0.0, -1.0)
            k2 = self._deriv_flat(Xa + (0.5 * dt) * k1, 0.0, -1.0)
            k3 = self._deriv_flat(Xa + (0.5 * dt) * k2, 0.0, -1.0)
            k4 = self._deriv_flat(Xa + dt * k3, 0.0, -1.0)
            X[:, :active] = Xa + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            step += 1
        return (out if bras is not None else finals), max_abs

    def _initial_data(self, init) -> np.ndarray:
        if isinstance(init, WaveStack):
            arr = np.asarray(init.data, dtype=complex)
        elif isinstance(init, np.ndarray):
            arr = np.asarray(init, dtype=complex)
        else:
            parts = init.components()
            if len(parts) != 1:
                raise ValueError("a mixture cannot be propagated in one "
                                 "run; loop over components()")
            arr = parts[0][1]
        if arr.ndim == 1 and arr.shape == (self.dim,):
            return self.initial_stack(arr)
        if arr.shape != (self.num_awf, self.dim):
            raise ValueError(f"stack shape {arr.shape} does not match "
                             f"({self.num_awf}, {self.dim})")
        return arr

    def run(self, plan: ContourPlan, init) -> Trajectory:
        """Full contour 0 -> t -> 2t with the plan's insertions.

        ``init`` may be a WaveStack, a system vector (row 0 of a fresh
        stack), or a single-component initial state.  Snapshots at the
        plan's record times are taken after any insertion at the same
        grid point and store the physical row only, unless
        ``record_full`` is set.
        """
        data = self._initial_data(init)
        n_half = plan.n_half
        events_c1: Dict[int, List[Operator]] = {}
        events_c2: Dict[int, List[Operator]] = {}
        for step, op in plan.insertion_steps:
            (events_c1 if step <= n_half else events_c2).setdefault(
                step, []).append(op)
        snaps_c1 = {step: i for i, step in enumerate(plan.record_steps)
                    if step <= n_half}
        snaps_c2 = {step: i for i, step in enumerate(plan.record_steps)
                    if step > n_half}

        y = data.ravel()
        y, got1, max1 = self.integrate_span(
            y, 0, n_half, plan.dt, +1.0, tau_of=lambda s: s,
            events=events_c1, snap_steps=snaps_c1)
        y, got2, max2 = self.integrate_span(
            y, n_half, n_half, plan.dt, -1.0,
            tau_of=lambda s: 2.0 * plan.t - s,
            events=events_c2, snap_steps=snaps_c2)

        snapshots = []
        collected = {**got1, **got2}
        for i, step in enumerate(plan.record_steps):
            stack2d = collected[i].reshape(self.num_awf, self.dim)
            s = step * plan.dt
            branch = Branch.C1 if step <= n_half else Branch.C2
            snapshots.append(Snapshot(
                s=s, branch=branch, rwf=stack2d[0].copy(),
                stack=stack2d.copy() if plan.record_full else None))
        final = WaveStack(data=y.reshape(self.num_awf, self.dim),
                          s=2.0 * plan.t, branch=Branch.C2)
        return Trajectory(snapshots=snapshots, final=final,
                          c1_max_abs=max1, c2_max_abs=max2)

    def level_norms(self, stack: np.ndarray) -> np.ndarray:
        """Max row magnitude per hierarchy level, an overflow diagnostic."""
        data = stack.reshape(self.num_awf, self.dim)
        out = np.zeros(self.space.N_max + 1)
        for level in range(self.space.N_max + 1):
            block = data[self.space.level_slice(level)]
            if block.size:
                out[level] = float(np.abs(block).max())
        return out


def hseom_rhs(space: HierarchySpace, expansion: BathExpansion,
              model: SystemModel, stack: WaveStack, s: float,
              branch: Branch, *, t_turn: Optional[float] = None) -> np.ndarray:
    """The derivative d phi / ds of every stack row (termwise, definitional).

    For scheduled Hamiltonians on C2 the turning time ``t_turn`` is required
    to fold s onto the physical clock.  Wrap a :class:`ContourEngine` for
    repeated evaluations; this convenience rebuilds the coupling matrices.
    """
    if branch is Branch.C1:
        tau = s
    elif model.time_dependent:
        if t_turn is None:
            raise ValueError("t_turn is required on C2 for scheduled models")
        tau = 2.0 * t_turn - s
    else:
        tau = 0.0
    engine = ContourEngine(space, expansion, model)
    return engine.rhs_stack(np.asarray(stack.data, dtype=complex), tau,
                            branch.sign)


def propagate(space: HierarchySpace, expansion: BathExpansion,
              model: SystemModel, plan: ContourPlan,
              init: WaveStack) -> Trajectory:
    """Run the full contour with a freshly built engine.

    The initial stack should have only row 0 populated (factorized initial
    conditions).  Build a :class:`ContourEngine` once and call its ``run``
    when doing many contours over the same setup.
    """
    return ContourEngine(space, expansion, model).run(plan, init)


def grid_dt(t: float, dt_target: float) -> float:
    """Largest step <= dt_target that divides t exactly."""
    if t <= 0:
        return dt_target
    return t / math.ceil(t / dt_target - _GRID_TOL)


def default_dt(Omega: float, t: float) -> float:
    """min(0.05/Omega, t/2000), snapped onto a divisor of t."""
    target = 0.05 / Omega if t <= 0 else min(0.05 / Omega, t / 2000.0)
    return grid_dt(t, target)
