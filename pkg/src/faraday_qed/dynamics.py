"""Two-state dynamics between |a> and |b> under H_eff = [[E0, M*], [M, E0]]."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyMode1, StepTooLarge
from .model import CONST

# RK4 stability boundary on the imaginary axis
RK4_STABILITY = 2.0 * math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class TwoStateTrajectory:
    times: np.ndarray
    c_a: np.ndarray
    c_b: np.ndarray

    @property
    def p_a(self) -> np.ndarray:
        return np.abs(self.c_a) ** 2

    @property
    def p_b(self) -> np.ndarray:
        return np.abs(self.c_b) ** 2

    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.p_a + self.p_b - 1.0)))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time_s", "p_a", "p_b", "re_ca", "im_ca", "re_cb", "im_cb"])
            for t, pa, pb, ca, cb in zip(self.times, self.p_a, self.p_b, self.c_a, self.c_b):
                w.writerow([f"{v:.17g}" for v in (t, pa, pb, ca.real, ca.imag, cb.real, cb.imag)])


def effective_hamiltonian(M: complex, E0: float) -> np.ndarray:
    return np.array([[E0, np.conj(M)], [M, E0]], dtype=complex)


def _as_grid(t_grid):
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or np.any(t < 0) or np.any(np.diff(t) < 0):
        raise ValueError("t_grid must be a nonnegative ascending 1-D sequence")
    return t


def rabi_period(M: complex) -> float:
    """Period of the populations, pi*hbar/|M|."""
    return math.pi * CONST.hbar / abs(M)


def evolve_analytic(M: complex, E0: float, t_grid) -> TwoStateTrajectory:
    """Closed-form solution starting from |a>.

    c_a = e^{-i E0 t/hbar} cos(|M| t/hbar),  c_b = -i e^{i arg M} e^{-i E0 t/hbar} sin(|M| t/hbar)
    """
    t = _as_grid(t_grid)
    phase = np.exp(-1j * E0 * t / CONST.hbar)
    x = abs(M) * t / CONST.hbar
    rel = M / abs(M) if M != 0 else 1.0
    return TwoStateTrajectory(t, phase * np.cos(x), -1j * rel * phase * np.sin(x))


def _rk4_propagate(H: np.ndarray, psi0: np.ndarray, t_grid: np.ndarray, step: float) -> np.ndarray:
    """Fixed-step RK4 for i hbar dpsi/dt = H psi, reporting at every grid time."""
    A = -1j * H / CONST.hbar
    out = np.empty((len(t_grid), len(psi0)), dtype=complex)
    psi = np.array(psi0, dtype=complex)
    t_now = 0.0
    for i, t_target in enumerate(t_grid):
        span = t_target - t_now
        if span > 0:
            nsteps = max(1, math.ceil(span / step - 1e-9))
            h = span / nsteps
            for _ in range(nsteps):
                k1 = A @ psi
                k2 = A @ (psi + 0.5 * h * k1)
                k3 = A @ (psi + 0.5 * h * k2)
                k4 = A @ (psi + h * k3)
                psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            t_now = t_target
        out[i] = psi
    return out


def evolve_numeric(M: complex, E0: float, t_grid, dt_max: float) -> TwoStateTrajectory:
    """Integrate the 2x2 Schroedinger equation with fixed-step RK4 from |a> at t = 0.

    H_eff = E0 * 1 + W, and E0 * 1 commutes with W, so the common phase
    e^{-i E0 t/hbar} is applied exactly and RK4 integrates W alone. This keeps
    the norm at roundoff even when |E0| >> |M|. The step is the smaller of
    ``dt_max`` and hbar/(100 |M|).
    """
    if not dt_max > 0:
        raise ValueError("dt_max must be positive")
    t = _as_grid(t_grid)
    rho = abs(M)
    if dt_max * rho / CONST.hbar > RK4_STABILITY:
        raise StepTooLarge(
            f"dt_max = {dt_max:.3e} s exceeds the RK4 stability bound "
            f"{RK4_STABILITY * CONST.hbar / rho:.3e} s for this Hamiltonian")
    step = dt_max
    if rho > 0:
        step = min(step, CONST.hbar / (100.0 * rho))
    W = effective_hamiltonian(M, 0.0)
    psi = _rk4_propagate(W, np.array([1.0, 0.0], dtype=complex), t, step)
    phase = np.exp(-1j * E0 * t / CONST.hbar)
    return TwoStateTrajectory(t, phase * psi[:, 0], phase * psi[:, 1])


def angle_from_occupations(n1_expect: float, n2_expect: float) -> float:
    """Rotation angle atan(sqrt(<n2>/<n1>)) from mode occupations."""
    if not n1_expect > 0:
        raise EmptyMode1(f"mode 1 occupation {n1_expect} <= 0: rotation angle undefined")
    if n2_expect < 0:
        raise ValueError("mode 2 occupation must be nonnegative")
    return math.atan(math.sqrt(n2_expect / n1_expect))


def small_angle_rotation(M: complex, t: float, n_photons: int) -> float:
    """Single-molecule angle |M| t / (hbar sqrt(n)) in the small-angle limit."""
    return abs(M) * t / (CONST.hbar * math.sqrt(n_photons))
