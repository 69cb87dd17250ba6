"""Fixed-step integration of delay systems and energy-balance monitoring.

The integrator is the classical fourth-order Runge-Kutta scheme organized
by the method of steps: the step size h must divide the delay tau exactly,
so the delayed time t - tau always lands on the grid for full steps.  The
delayed state at stage midpoints is interpolated with a cubic Hermite
polynomial on already-computed intervals (using stored derivative samples)
and linearly inside the initial history, which is itself resampled
linearly onto the step grid.  Input signals are samples on the step grid,
read as piecewise-linear between samples.

Energy accounting uses the Lyapunov-Krasovskii Hamiltonian

    E_k = (1/2) x_k^T H x_k + trapezoid of x^T Theta x over [t_k - tau, t_k]

and flags every step whose energy gain exceeds the trapezoidal estimate of
the supplied power integral of y^T u by more than a quadrature tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_matrix, require_symmetric
from .systems import (
    DelayPHSystem,
    GeneralDelaySystem,
    HistoryFunction,
    SystemValidationError,
    delay_ph_to_general,
    validate,
)

__all__ = [
    "BlowUpError",
    "EnergyRecord",
    "Trajectory",
    "evaluate_hamiltonian",
    "export_trajectory_csv",
    "integrate_dde",
    "monitor_dissipation",
    "simulate_delay_ph",
]

#: state norm beyond which integration aborts
BLOWUP_NORM = 1e12


class BlowUpError(RuntimeError):
    """Raised when the state norm leaves the trust region mid-run."""

    def __init__(self, step_index: int, time: float, norm: float):
        self.step_index = int(step_index)
        self.time = float(time)
        self.norm = float(norm)
        super().__init__(
            f"state norm {norm:.3e} exceeded {BLOWUP_NORM:.0e} at "
            f"t = {time:.6g} (step {step_index}); integration aborted"
        )


@dataclass(frozen=True)
class Trajectory:
    """Grid samples of one integration run.

    ``padded_states`` prepends the resampled history, so column
    ``delay_steps + k`` holds x(t_k) and column k holds x(t_k - tau);
    ``states`` is the t >= 0 view of the same data.
    """

    step: float
    times: np.ndarray          # (K+1,)
    states: np.ndarray         # (n, K+1)
    inputs: np.ndarray         # (m, K+1)
    outputs: np.ndarray        # (m, K+1)
    history: HistoryFunction   # resampled onto the step grid
    delay_steps: int
    padded_states: np.ndarray  # (n, delay_steps + K + 1)

    @property
    def n(self) -> int:
        return self.states.shape[0]

    @property
    def m(self) -> int:
        return self.inputs.shape[0]

    def state_window(self, k: int) -> np.ndarray:
        """Samples of x on [t_k - tau, t_k], one column per grid point."""
        d = self.delay_steps
        if not 0 <= k < self.times.size:
            raise IndexError(f"step index {k} out of range")
        return self.padded_states[:, k : k + d + 1]


@dataclass(frozen=True)
class EnergyRecord:
    """Energy balance along a trajectory.

    ``supplied[k]`` is the trapezoidal estimate of the integral of y^T u
    over [0, t_k]; ``violations`` lists (step index k, gap) for every step
    where E_{k+1} - E_k exceeds the supplied energy by more than
    ``tol_energy``.
    """

    hamiltonians: np.ndarray
    supplied: np.ndarray
    violations: list[tuple[int, float]]
    tol_energy: float

    @property
    def passivity_ok(self) -> bool:
        return not self.violations


def _step_count(value: float, h: float, name: str) -> int:
    ratio = float(value) / h
    k = round(ratio)
    if abs(ratio - k) > 1e-9 * max(1.0, abs(ratio)) or k < 1:
        raise ValueError(
            f"{name} = {value!r} must be a positive integer multiple of h = {h!r}"
        )
    return int(k)


def _input_samples(inputs, times: np.ndarray, m: int) -> np.ndarray:
    count = times.size
    if inputs is None:
        return np.zeros((m, count))
    if callable(inputs):
        cols = [np.asarray(inputs(float(t)), dtype=float).reshape(-1) for t in times]
        arr = np.array(cols).T
        if arr.shape != (m, count):
            raise ValueError(
                f"input callable must return {m} values per time, got shape {arr.shape}"
            )
    else:
        arr = np.asarray(inputs, dtype=float)
        if arr.ndim == 1 and m == 1:
            arr = arr.reshape(1, -1)
        if arr.shape != (m, count):
            raise ValueError(
                f"input samples must have shape ({m}, {count}), got {arr.shape}"
            )
    if not np.all(np.isfinite(arr)):
        raise ValueError("input samples contain non-finite entries")
    return arr


def integrate_dde(
    system: GeneralDelaySystem, history: HistoryFunction, inputs, T: float, h: float
) -> Trajectory:
    """Integrate x' = A0 x + A1 x(t - tau) + B u from the given history.

    ``h`` must divide both tau and T exactly (within 1e-9 relative);
    ``inputs`` is None (zero input), an (m, K+1) sample array on the step
    grid, or a callable t -> u(t) sampled onto it.  Raises BlowUpError when
    the state norm exceeds 1e12.
    """
    if not h > 0.0:
        raise ValueError(f"h must be positive, got {h}")
    d = _step_count(system.tau, h, "tau")
    big_k = _step_count(T, h, "T")
    n, m = system.n, system.m
    if history.n != n:
        raise ValueError(
            f"history has {history.n} state components, system has {n}"
        )
    if abs(history.span - system.tau) > 1e-9 * max(1.0, system.tau):
        raise ValueError(
            f"history covers [-{history.span}, 0] but the delay is {system.tau}"
        )
    hist_grid = (np.arange(d + 1) - d) * h
    hist_vals = history.sample_at(hist_grid)
    times = np.arange(big_k + 1) * h
    u = _input_samples(inputs, times, m)

    a0, a1, b = system.A0, system.A1, system.B
    x_all = np.empty((n, d + big_k + 1))
    x_all[:, : d + 1] = hist_vals
    deriv = np.zeros((n, d + big_k + 1))  # derivative samples for t >= 0 only

    def f(x, xd, uu):
        return a0 @ x + a1 @ xd + b @ uu

    deriv[:, d] = f(x_all[:, d], x_all[:, 0], u[:, 0])
    for k in range(big_k):
        c = d + k
        x = x_all[:, c]
        u0 = u[:, k]
        u1 = u[:, k + 1]
        um = 0.5 * (u0 + u1)
        xd0 = x_all[:, k]
        xd1 = x_all[:, k + 1]
        if k < d:
            # delayed interval lies in the (piecewise-linear) history
            xdm = 0.5 * (xd0 + xd1)
        else:
            # cubic Hermite midpoint from stored values and derivatives
            xdm = 0.5 * (xd0 + xd1) + 0.125 * h * (deriv[:, k] - deriv[:, k + 1])
        k1 = deriv[:, c]
        k2 = f(x + 0.5 * h * k1, xdm, um)
        k3 = f(x + 0.5 * h * k2, xdm, um)
        k4 = f(x + h * k3, xd1, u1)
        x_next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        norm = float(np.linalg.norm(x_next))
        if not np.isfinite(norm) or norm > BLOWUP_NORM:
            raise BlowUpError(k + 1, times[k + 1], norm)
        x_all[:, c + 1] = x_next
        deriv[:, c + 1] = f(x_next, x_all[:, k + 1], u1)

    states = x_all[:, d:].copy()
    outputs = system.C @ states
    return Trajectory(
        step=float(h),
        times=times,
        states=states,
        inputs=u.copy(),
        outputs=outputs,
        history=HistoryFunction(hist_grid, hist_vals),
        delay_steps=d,
        padded_states=x_all,
    )


def evaluate_hamiltonian(traj: Trajectory, H, theta, k: int) -> float:
    """Lyapunov-Krasovskii energy at step k.

    (1/2) x_k^T H x_k plus the trapezoidal approximation of the integral
    of x^T Theta x over [t_k - tau, t_k] on the step grid.
    """
    h_mat = require_symmetric(H, "H")
    th = require_symmetric(theta, "theta")
    w = traj.state_window(k)
    x = w[:, -1]
    quad = 0.5 * float(x @ (h_mat @ x))
    g = np.einsum("ij,ij->j", w, th @ w)
    integral = traj.step * (0.5 * g[0] + g[1:-1].sum() + 0.5 * g[-1])
    return quad + float(integral)


def monitor_dissipation(
    traj: Trajectory, H, theta, tol_energy: float | None = None
) -> EnergyRecord:
    """Check the discrete dissipation inequality step by step.

    Flags step k when E_{k+1} - E_k - supplied_k > tol_energy, where
    supplied_k is the trapezoidal estimate of the y^T u integral over one
    step.  The default tolerance is 10 h^2 (1 + max_k ||x_k||^2), which
    covers the quadrature error of both trapezoid rules on a resolved run.
    """
    big_k = traj.times.size - 1
    ham = np.array(
        [evaluate_hamiltonian(traj, H, theta, k) for k in range(big_k + 1)]
    )
    power = np.einsum("ij,ij->j", traj.outputs, traj.inputs)
    seg = 0.5 * traj.step * (power[:-1] + power[1:])
    supplied = np.concatenate([[0.0], np.cumsum(seg)])
    if tol_energy is None:
        max_sq = float(np.max(np.sum(traj.padded_states**2, axis=0)))
        tol_energy = 10.0 * traj.step**2 * (1.0 + max_sq)
    gaps = ham[1:] - ham[:-1] - seg
    violations = [
        (int(k), float(g)) for k, g in enumerate(gaps) if g > tol_energy
    ]
    return EnergyRecord(
        hamiltonians=ham,
        supplied=supplied,
        violations=violations,
        tol_energy=float(tol_energy),
    )


def simulate_delay_ph(
    system: DelayPHSystem,
    history: HistoryFunction,
    inputs,
    T: float,
    h: float,
    monitor: bool = True,
):
    """Integrate a delay port-Hamiltonian system and audit its energy.

    Converts to general coordinates, integrates, and (when ``monitor``)
    checks dissipation against the system's stored theta, which must then
    be present.  Returns (trajectory, energy_record), the record being
    None when monitoring is off.
    """
    violations = validate(system)
    if violations:
        raise SystemValidationError(violations)
    if monitor and system.theta is None:
        raise ValueError(
            "monitoring requires a theta on the system; store one or pass "
            "monitor=False"
        )
    traj = integrate_dde(delay_ph_to_general(system), history, inputs, T, h)
    record = None
    if monitor:
        record = monitor_dissipation(traj, system.H, system.theta)
    return traj, record


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def export_trajectory_csv(traj: Trajectory, path, energies=None) -> None:
    """Write t, x1..xn, u1..um, y1..ym, H rows with 17-digit reals.

    ``energies`` fills the H column (length K+1); without it the column is
    written as zeros (no energy matrix is known here).
    """
    count = traj.times.size
    if energies is None:
        energies = np.zeros(count)
    energies = np.asarray(energies, dtype=float).reshape(-1)
    if energies.size != count:
        raise ValueError(
            f"energies has {energies.size} entries for {count} samples"
        )
    header = (
        ["t"]
        + [f"x{i + 1}" for i in range(traj.n)]
        + [f"u{j + 1}" for j in range(traj.m)]
        + [f"y{j + 1}" for j in range(traj.m)]
        + ["H"]
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(count):
            row = (
                [traj.times[k]]
                + list(traj.states[:, k])
                + list(traj.inputs[:, k])
                + list(traj.outputs[:, k])
                + [energies[k]]
            )
            fh.write(",".join(_fmt(v) for v in row) + "\n")
