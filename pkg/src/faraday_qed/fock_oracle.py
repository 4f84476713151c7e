"""Brute-force reference calculations.

Exact diagonalization of the Zeeman-perturbed molecule, and exact evolution of
molecule (x) mode 1 (x) mode 2 in a truncated Fock space, with the full
electric-dipole coupling (rotating and counter-rotating terms).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .amplitude import (RotationMethod, RotationResult, amplitude_second_order_closed,
                        faraday_b_term_angle, signed_angle_from_amplitude)
from .errors import ConvergenceFailure, DimensionError
from .model import CONST, ExperimentConfig, FieldConfig, MolecularModel, Tolerances
from .perturbation import first_order_corrections, zeeman_matrix


@dataclass(frozen=True)
class FockBasis:
    n_levels: int
    n1_max: int
    n2_max: int

    def __post_init__(self):
        if self.n_levels < 1 or self.n1_max < 0 or self.n2_max < 0:
            raise DimensionError("basis dimensions must be nonnegative (and L >= 1)")

    @property
    def dim(self) -> int:
        return self.n_levels * (self.n1_max + 1) * (self.n2_max + 1)

    def index(self, level: int, n1: int, n2: int) -> int:
        if not (0 <= level < self.n_levels and 0 <= n1 <= self.n1_max and 0 <= n2 <= self.n2_max):
            raise DimensionError(f"state ({level}, {n1}, {n2}) outside the truncated basis")
        return (level * (self.n1_max + 1) + n1) * (self.n2_max + 1) + n2

    def state(self, idx: int) -> tuple[int, int, int]:
        if not 0 <= idx < self.dim:
            raise DimensionError(f"flat index {idx} out of range")
        rest, n2 = divmod(idx, self.n2_max + 1)
        level, n1 = divmod(rest, self.n1_max + 1)
        return level, n1, n2

    def occupations(self, mode: int) -> np.ndarray:
        """Photon number of ``mode`` (1 or 2) for every basis state, flat order."""
        n1 = np.arange(self.n1_max + 1)
        n2 = np.arange(self.n2_max + 1)
        lv = np.ones(self.n_levels)
        if mode == 1:
            return np.kron(lv, np.kron(n1, np.ones_like(n2))).astype(float)
        if mode == 2:
            return np.kron(lv, np.kron(np.ones_like(n1), n2)).astype(float)
        raise ValueError("mode must be 1 or 2")

    def basis_vector(self, level: int, n1: int, n2: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(level, n1, n2)] = 1.0
        return v


class DenseHermitian:
    """Dense Hermitian matrix (J) with a cached, phase-fixed eigendecomposition."""

    def __init__(self, matrix, rel_tol: float = 1e-12):
        a = np.array(matrix, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"matrix must be square, got shape {a.shape}")
        scale = float(np.max(np.abs(a))) if a.size else 0.0
        if np.max(np.abs(a - a.conj().T), initial=0.0) > rel_tol * scale:
            raise DimensionError("matrix is not Hermitian to the requested tolerance")
        a.setflags(write=False)
        self.matrix = a
        self._eig = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigh(self):
        """Ascending eigenvalues and orthonormal eigenvectors (columns).

        Each eigenvector is rotated so that its largest-magnitude component is
        real and positive, which makes the decomposition deterministic.
        """
        if self._eig is None:
            try:
                w, v = np.linalg.eigh(self.matrix)
            except np.linalg.LinAlgError as exc:
                raise ConvergenceFailure(f"Hermitian eigensolver failed: {exc}") from exc
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
                raise ConvergenceFailure("eigensolver returned non-finite values")
            order = np.argsort(w, kind="stable")
            w, v = w[order], v[:, order]
            piv = np.argmax(np.abs(v), axis=0)
            ph = v[piv, np.arange(v.shape[1])]
            v = v * (np.abs(ph) / ph)[None, :]
            v[piv, np.arange(v.shape[1])] = np.abs(ph)
            w.setflags(write=False)
            v.setflags(write=False)
            self._eig = (w, v)
        return self._eig

    def expectation(self, psi) -> float:
        return float(np.real(np.vdot(psi, self.matrix @ psi)))


# --------------------------------------------------------------- molecule

def exact_diagonalize_molecule(model: MolecularModel, B):
    """Eigenvalues (ascending) and eigenvectors of H_mol - m.B in the unperturbed basis."""
    H = DenseHermitian(np.diag(model.energies).astype(complex) + zeeman_matrix(model, B))
    return H.eigh()


def exact_ground_energy(model: MolecularModel, B) -> float:
    return float(exact_diagonalize_molecule(model, B)[0][0])


# ----------------------------------------------------------- Fock space

def _annihilation(nmax: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, nmax + 1, dtype=float)), k=1)


def default_basis(model: MolecularModel, f: FieldConfig) -> FockBasis:
    return FockBasis(model.n_levels, f.n_photons, 2)


def build_total_hamiltonian(model: MolecularModel, f: FieldConfig, basis: FockBasis, B) -> DenseHermitian:
    """H_mol + (-m.B) + sum_modes hbar w (n + 1/2) - mu.E(0), no rotating-wave approximation."""
    L = model.n_levels
    if basis.n_levels != L:
        raise DimensionError(f"basis has {basis.n_levels} levels, model has {L}")
    I1 = np.eye(basis.n1_max + 1)
    I2 = np.eye(basis.n2_max + 1)
    Im = np.eye(L)
    a1 = _annihilation(basis.n1_max)
    a2 = _annihilation(basis.n2_max)
    hw = f.photon_energy
    C = f.coupling_constant()

    def on_mol(op):
        return np.kron(op, np.kron(I1, I2))

    def on_mode1(op):
        return np.kron(Im, np.kron(op, I2))

    def on_mode2(op):
        return np.kron(Im, np.kron(I1, op))

    H = on_mol(np.diag(model.energies) + zeeman_matrix(model, B)).astype(complex)
    H += hw * on_mode1(a1.T @ a1 + 0.5 * I1)
    H += hw * on_mode2(a2.T @ a2 + 0.5 * I2)
    for i in range(3):
        # E_i(0) = i C sum_modes [e_i a - e_i^* a^dagger]
        E1 = 1j * C * (f.e1[i] * a1 - np.conj(f.e1[i]) * a1.T)
        E2 = 1j * C * (f.e2[i] * a2 - np.conj(f.e2[i]) * a2.T)
        mu_i = model.mu[i]
        H -= np.kron(mu_i, np.kron(E1, I2)) + np.kron(mu_i, np.kron(I1, E2))
    return DenseHermitian(H)


def evolve_exact(H: DenseHermitian, psi0, t: float) -> np.ndarray:
    """psi(t) = exp(-i H t / hbar) psi0 via the eigendecomposition."""
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (H.dim,):
        raise DimensionError(f"state has shape {psi0.shape}, Hamiltonian dimension is {H.dim}")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-12:
        raise ValueError("initial state must be normalized")
    if t == 0:
        return psi0.copy()
    w, v = H.eigh()
    # measure energies from the lowest eigenvalue; only a global phase changes
    phases = np.exp(-1j * (w - w[0]) * t / CONST.hbar)
    return v @ (phases * (v.conj().T @ psi0))


def amplitude_resolvable(M_abs: float, H: DenseHermitian, margin: float = 1e6) -> bool:
    """Whether a coupling of size M_abs splits |a>, |b> well above double-precision
    eigenvalue noise (~eps * ||H||)."""
    norm = float(np.max(np.sum(np.abs(H.matrix), axis=1)))
    return M_abs > margin * np.finfo(float).eps * norm


def expectation_number(psi, basis: FockBasis, mode: int) -> float:
    return float(np.sum(basis.occupations(mode) * np.abs(psi) ** 2))


@dataclass(frozen=True)
class OracleRun:
    psi: np.ndarray
    n1: float
    n2: float
    theta_single: float
    leakage: float
    norm_drift: float
    energy_drift: float


def run_oracle(model: MolecularModel, f: FieldConfig, B, basis: FockBasis, t: float) -> OracleRun:
    """Evolve |g; n(1), 0(2)> for time t and collect the observables."""
    if f.n_photons < 1:
        raise ValueError("the oracle needs at least one photon in mode 1")
    H = build_total_hamiltonian(model, f, basis, B)
    g = model.ground_index
    n = f.n_photons
    psi0 = basis.basis_vector(g, n, 0)
    psi = evolve_exact(H, psi0, t)
    n1 = expectation_number(psi, basis, 1)
    n2 = expectation_number(psi, basis, 2)
    ia = basis.index(g, n, 0)
    ib = basis.index(g, n - 1, 1)
    pop = np.abs(psi) ** 2
    e0 = H.expectation(psi0)
    e1 = H.expectation(psi)
    return OracleRun(
        psi=psi, n1=n1, n2=n2,
        theta_single=math.atan(math.sqrt(n2 / n1)) if n1 > 0 else math.pi / 2,
        leakage=float(1.0 - pop[ia] - pop[ib]),
        norm_drift=float(abs(np.linalg.norm(psi) - 1.0)),
        energy_drift=float(abs(e1 - e0) / abs(e0)) if e0 else float(abs(e1 - e0)),
    )


def oracle_rotation_angle(model: MolecularModel, f: FieldConfig, x: ExperimentConfig,
                          basis: FockBasis | None, t: float) -> RotationResult:
    """Rotation angle atan(sqrt(<n2>/<n1>)) after exact evolution of one molecule.

    The static field is taken from ``x``. Coherent forward scattering from N
    molecules is represented by scaling the single-molecule angle by N (valid
    in the small-angle regime); no multi-emitter state is simulated.
    """
    basis = basis or default_basis(model, f)
    run = run_oracle(model, f, x.B, basis, t)
    return RotationResult(
        theta=x.n_molecules_N * run.theta_single,
        method=RotationMethod.ORACLE,
        diagnostics={"n1": run.n1, "n2": run.n2, "leakage": run.leakage,
                     "norm_drift": run.norm_drift, "energy_drift": run.energy_drift,
                     "dimension": basis.dim},
    )


# ------------------------------------------------ finite-difference slope

def _theta_along_k(model, f, x, b, method, tol):
    xb = x.with_B(b * f.k_hat)
    if method == "perturbed":
        pm = first_order_corrections(model, xb.B, tol)
        M = amplitude_second_order_closed(pm, f, tol)
        return signed_angle_from_amplitude(M, f, xb)
    if method == "b_term":
        return faraday_b_term_angle(model, f, xb, tol).theta
    raise ValueError(f"unknown pipeline {method!r}; use 'perturbed' or 'b_term'")


def finite_difference_dtheta_dB(model: MolecularModel, f: FieldConfig, x: ExperimentConfig,
                                h: float, method: str = "perturbed",
                                tol: Tolerances | None = None) -> float:
    """d(theta)/d|B| at B = 0 along k, central differences with one Richardson step.

    ``method`` selects the pipeline: ``"perturbed"`` (second-order amplitude on
    the first-order-corrected molecule, signed by the imaginary part of M) or
    ``"b_term"`` (the closed-form B-term angle).
    """
    if not h > 0:
        raise ValueError("step h must be positive")
    tol = tol or Tolerances()

    def central(step):
        return (_theta_along_k(model, f, x, step, method, tol)
                - _theta_along_k(model, f, x, -step, method, tol)) / (2.0 * step)

    d_h = central(h)
    d_h2 = central(h / 2.0)
    return (4.0 * d_h2 - d_h) / 3.0


def oracle_report(model: MolecularModel, f: FieldConfig, x: ExperimentConfig, t: float,
                  basis: FockBasis | None = None, tol: Tolerances | None = None) -> dict:
    """Compare the exact oracle with the two-state prediction at the same B."""
    tol = tol or Tolerances()
    basis = basis or default_basis(model, f)
    res = oracle_rotation_angle(model, f, x, basis, t)
    pm = first_order_corrections(model, x.B, tol)
    M = amplitude_second_order_closed(pm, f, tol)
    theta_pt = x.n_molecules_N * abs(M.value) * t / (CONST.hbar * math.sqrt(f.n_photons))
    dev = abs(res.theta - theta_pt) / abs(theta_pt) if theta_pt else float("nan")
    return {
        "parameters": {
            "omega_rad_s": f.omega, "n_photons": f.n_photons, "volume_m3": f.volume,
            "k_hat": f.k_hat.tolist(), "e1": f.e1.tolist(), "e2": f.e2.tolist(),
            "B_T": x.B.tolist(), "n_molecules": x.n_molecules_N, "time_s": t,
            "n1_max": basis.n1_max, "n2_max": basis.n2_max, "dimension": basis.dim,
        },
        "theta_oracle": res.theta,
        "theta_perturbative": theta_pt,
        "amplitude_abs_J": abs(M.value),
        "relative_deviation": dev,
        "leakage": res.diagnostics["leakage"],
        "norm_drift": res.diagnostics["norm_drift"],
    }
