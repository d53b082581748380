"""Time-dependent Schrödinger propagation under interpolated Hamiltonians.

The propagator applies piecewise-constant midpoint exponentials
exp(-i dt H(s(t + dt/2))) and halves the step until the final state moves by
less than the requested tolerance, so unitarity is structural.  hbar = 1.
"""

import math
import time
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse.linalg as spla
from scipy.integrate import cumulative_trapezoid

from .paulis import OperatorSum
from .spectral import SpectralProfile, pagt_norm_diff
from .states import StateVector, reduced_density

DENSE_EVOLVE_CUTOFF = 4096


@dataclass(frozen=True)
class Schedule:
    """Monotone map t -> s with s(0) = 0 and s(T) = 1."""

    kind: str
    T: float
    fn: object

    def __call__(self, t):
        return float(self.fn(t))

    def validate(self, probes: int = 1001, tol: float = 1e-9):
        ts = np.linspace(0.0, self.T, probes)
        ss = np.array([self.fn(t) for t in ts], dtype=float)
        if abs(ss[0]) > tol or abs(ss[-1] - 1.0) > tol:
            raise ValueError("schedule must run from s(0)=0 to s(T)=1")
        if np.any(np.diff(ss) < -1e-10):
            raise ValueError("schedule must be non-decreasing")
        return self


def linear_schedule(T: float) -> Schedule:
    if T < 0:
        raise ValueError("total time must be non-negative")
    if T == 0:
        return Schedule("linear", 0.0, lambda t: 1.0)
    return Schedule("linear", float(T), lambda t: min(max(t / T, 0.0), 1.0)).validate()


def gap_adapted_schedule(profile: SpectralProfile, T: float) -> Schedule:
    """Schedule with ds/dt proportional to gap(s)^2.

    Satisfies ds/dt = alpha * gap(s)^2 / ||H_fin - H_ini|| with the constant
    alpha fixed by s(T) = 1; time concentrates where the gap is small.
    """
    if T <= 0:
        raise ValueError("total time must be positive")
    gaps = profile.gaps
    if np.any(~np.isfinite(gaps)) or np.any(gaps <= 0):
        raise ValueError("gap-adapted schedule needs a strictly positive gap profile")
    tau = cumulative_trapezoid(1.0 / gaps**2, profile.s_grid, initial=0.0)
    t_table = T * tau / tau[-1]
    s_table = profile.s_grid

    def fn(t):
        return np.interp(t, t_table, s_table)

    return Schedule("gap-adapted", float(T), fn).validate()


def tabulated_schedule(times, values) -> Schedule:
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.ndim != 1 or times.shape != values.shape or times.size < 2:
        raise ValueError("need matching 1-d time and value tables")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    T = float(times[-1])

    def fn(t):
        return np.interp(t, times, values)

    return Schedule("custom-tabulated", T, fn).validate()


def lagged_schedule(base: Schedule, lag_fraction: float) -> Schedule:
    """Delay the start by lag_fraction*T, then compress so s still reaches 1."""
    if not (0 <= lag_fraction < 1):
        raise ValueError("lag fraction must lie in [0, 1)")
    if lag_fraction == 0:
        return base
    T = base.T
    lag = lag_fraction * T

    def fn(t):
        if t <= lag:
            return 0.0
        return base.fn((t - lag) * T / (T - lag))

    return Schedule(f"{base.kind}+lag{lag_fraction:g}", T, fn).validate()


@dataclass(frozen=True)
class EvolutionReport:
    """Outcome of one propagation run."""

    final_state: StateVector
    fidelity: float
    leakage: float
    norm_drift: float
    steps: int
    converged_diff: float
    wall_time: float
    T: float
    schedule_kind: str
    trace: tuple = ()


class StepConvergenceError(RuntimeError):
    def __init__(self, message, last_diff):
        super().__init__(message)
        self.last_diff = last_diff


def _materialize(h: OperatorSum, dense: bool):
    return h.to_dense() if dense else h.to_sparse()


def _step(psi, h_mat, dt, dense):
    if dense:
        return la.expm(-1j * dt * h_mat) @ psi
    return spla.expm_multiply(-1j * dt * h_mat, psi)


def _propagate(h_of_t, psi0, T, n_steps, dense, collect=None):
    psi = psi0.copy()
    if T == 0 or n_steps == 0:
        return psi
    dt = T / n_steps
    for k in range(n_steps):
        psi = _step(psi, h_of_t((k + 0.5) * dt), dt, dense)
        if collect is not None:
            collect((k + 1) * dt, psi)
    return psi


def _ground_space(h_mat_dense: np.ndarray, degeneracy_tol: float = 1e-8):
    vals, vecs = np.linalg.eigh(h_mat_dense)
    scale = max(1.0, float(np.max(np.abs(vals))))
    keep = vals <= vals[0] + degeneracy_tol * scale
    return vecs[:, keep]


def _run_engine(
    h_of_t,
    h_final: OperatorSum,
    schedule: Schedule,
    psi0: StateVector,
    *,
    target: StateVector = None,
    dt_max: float = 0.05,
    tol: float = 1e-6,
    max_halvings: int = 16,
    n_steps: int = None,
    trace_stride: int = None,
) -> EvolutionReport:
    dim = 1 << psi0.n_qubits
    dense = dim <= DENSE_EVOLVE_CUTOFF
    T = schedule.T
    psi_arr = psi0.amplitudes.astype(complex)
    start = time.perf_counter()
    if n_steps is not None:
        final = _propagate(h_of_t, psi_arr, T, n_steps, dense)
        steps, diff = n_steps, math.nan
    else:
        steps = max(16, math.ceil(T / dt_max)) if T > 0 else 0
        prev = _propagate(h_of_t, psi_arr, T, steps, dense)
        final, diff = prev, 0.0
        if T > 0:
            converged = False
            for _ in range(max_halvings):
                steps *= 2
                cur = _propagate(h_of_t, psi_arr, T, steps, dense)
                diff = float(np.linalg.norm(cur - prev))
                prev = cur
                if diff < tol:
                    converged = True
                    break
            final = prev
            if not converged:
                raise StepConvergenceError(
                    f"step halving stalled at {steps} steps with change {diff:.3e} > tol {tol:.3e}",
                    diff,
                )
    gs = _ground_space(_materialize(h_final, True)) if dense else None
    trace = []
    if trace_stride is not None and T > 0:

        def collect(t, psi):
            idx = round(t / (T / steps))
            if idx % trace_stride and idx != steps:
                return
            fid = abs(np.vdot(target.amplitudes, psi)) ** 2 if target is not None else math.nan
            leak_t = (
                max(0.0, 1.0 - float(np.sum(np.abs(gs.conj().T @ psi) ** 2)))
                if gs is not None
                else math.nan
            )
            trace.append((float(t), schedule(t), float(fid), leak_t, float(np.linalg.norm(psi))))

        _propagate(h_of_t, psi_arr, T, steps, dense, collect=collect)
    wall = time.perf_counter() - start
    norm_drift = abs(float(np.linalg.norm(final)) - 1.0)
    if norm_drift > 1e-8:
        raise RuntimeError(f"propagation lost unitarity: norm drift {norm_drift:.3e}")
    final_sv = StateVector(final, psi0.n_qubits)
    fid = float(abs(np.vdot(target.amplitudes, final)) ** 2) if target is not None else math.nan
    leak = math.nan
    if gs is not None:
        overlaps = gs.conj().T @ final
        leak = max(0.0, 1.0 - float(np.sum(np.abs(overlaps) ** 2)))
    return EvolutionReport(
        final_state=final_sv,
        fidelity=fid,
        leakage=leak,
        norm_drift=norm_drift,
        steps=steps,
        converged_diff=diff,
        wall_time=wall,
        T=T,
        schedule_kind=schedule.kind,
        trace=tuple(trace),
    )


def evolve(
    h_ini: OperatorSum,
    h_fin: OperatorSum,
    schedule: Schedule,
    psi0: StateVector,
    **kwargs,
) -> EvolutionReport:
    """Propagate under H(s) = (1-s) H_ini + s H_fin along the schedule."""
    if h_ini.n_qubits != h_fin.n_qubits or h_ini.n_qubits != psi0.n_qubits:
        raise ValueError("operators and state must share one register")
    if abs(psi0.norm - 1.0) > 1e-9:
        raise ValueError("initial state must be normalized")
    dense = (1 << psi0.n_qubits) <= DENSE_EVOLVE_CUTOFF
    a_mat = _materialize(h_ini, dense)
    b_mat = _materialize(h_fin, dense)

    def h_of_t(t):
        s = schedule(t)
        return (1.0 - s) * a_mat + s * b_mat

    return _run_engine(h_of_t, h_fin, schedule, psi0, **kwargs)


def evolve_multiterm(
    terms,
    psi0: StateVector,
    T: float,
    *,
    schedule_kind: str = "multiterm",
    **kwargs,
) -> EvolutionReport:
    """Propagate under H(t) = sum_k f_k(t) * H_k with per-term schedules.

    `terms` is a list of (OperatorSum, f_k) pairs where each f_k maps
    t in [0, T] to the term's coefficient.  When all f_k equal (1 - s(t)) or
    s(t) for one common schedule this reduces to :func:`evolve`.
    """
    if not terms:
        raise ValueError("need at least one term")
    n = terms[0][0].n_qubits
    if any(h.n_qubits != n for h, _ in terms) or psi0.n_qubits != n:
        raise ValueError("operators and state must share one register")
    if abs(psi0.norm - 1.0) > 1e-9:
        raise ValueError("initial state must be normalized")
    dense = (1 << n) <= DENSE_EVOLVE_CUTOFF
    mats = [_materialize(h, dense) for h, _ in terms]
    fns = [f for _, f in terms]

    def h_of_t(t):
        acc = float(fns[0](t)) * mats[0]
        for mat, f in zip(mats[1:], fns[1:]):
            acc = acc + float(f(t)) * mat
        return acc

    h_final = OperatorSum((), n)
    for h, f in terms:
        h_final = h_final + float(f(T)) * h
    wrapper = Schedule(schedule_kind, float(T), lambda t: math.nan)
    return _run_engine(h_of_t, h_final, wrapper, psi0, **kwargs)


@dataclass(frozen=True)
class BranchDecomposition:
    """psi = |0>_c a*target0 + |1>_c b*target1 + residual."""

    theta: float
    p0: float
    p1: float
    residual: float
    defined: bool


def branch_phase(
    psi: StateVector,
    control: int,
    target0: StateVector,
    target1: StateVector,
    *,
    min_amplitude: float = 1e-6,
) -> BranchDecomposition:
    """Relative phase arg(b/a) between the two control branches of psi."""
    n = psi.n_qubits
    if target0.n_qubits != n - 1 or target1.n_qubits != n - 1:
        raise ValueError("branch targets must live on the register without the control")
    for t in (target0, target1):
        if abs(t.norm - 1.0) > 1e-9:
            raise ValueError("branch targets must be normalized")
    arr = np.moveaxis(psi.tensor(), control - 1, 0).reshape(2, -1)
    a = complex(np.vdot(target0.amplitudes, arr[0]))
    b = complex(np.vdot(target1.amplitudes, arr[1]))
    residual = max(0.0, float(psi.norm**2 - abs(a) ** 2 - abs(b) ** 2))
    defined = abs(a) >= min_amplitude and abs(b) >= min_amplitude
    theta = float(np.angle(b / a)) if defined else math.nan
    return BranchDecomposition(theta, abs(a) ** 2, abs(b) ** 2, residual, defined)


def reduced_purity(psi: StateVector, keep) -> float:
    """trace(rho^2) of the reduced state on the kept qubits."""
    rho = reduced_density(psi, keep)
    return float(np.real(np.sum(np.abs(rho) ** 2)))
