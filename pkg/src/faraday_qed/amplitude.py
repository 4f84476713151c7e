"""Transition amplitude between |a> = |g; n(1), 0(2)> and |b> = |g; (n-1)(1), 1(2)>.

Three independent evaluations are provided:

* ``amplitude_second_order_diagrams`` sums the two time orderings (absorb from
  mode 1 first, or emit into mode 2 first) vertex by vertex;
* ``amplitude_second_order_closed`` is the rearranged closed form in terms of
  Re/Im of dipole products;
* ``amplitude_third_order`` works in the unperturbed molecular basis with the
  static Zeeman coupling as an explicit third vertex.

``faraday_b_term_angle`` is the closed-form B-term rotation angle.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpectrum, NearResonance
from .model import CONST, ExperimentConfig, FieldConfig, MolecularModel, Tolerances, detect_degeneracy
from .perturbation import PerturbedModel, zeeman_matrix


class AmplitudeOrder(str, enum.Enum):
    SECOND_ORDER_CLOSED = "second_order_closed"
    SECOND_ORDER_DIAGRAMS = "second_order_diagrams"
    THIRD_ORDER = "third_order"


class RotationMethod(str, enum.Enum):
    VIA_AMPLITUDE = "via_amplitude"
    B_TERM_FORMULA = "b_term_formula"
    ORACLE = "oracle"


@dataclass(frozen=True)
class TransitionAmplitude:
    value: complex  # J
    order: AmplitudeOrder
    field: FieldConfig

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError(f"non-finite transition amplitude {self.value}")

    def __abs__(self):
        return abs(self.value)


@dataclass(frozen=True)
class RotationResult:
    theta: float  # rad
    method: RotationMethod
    amplitude: TransitionAmplitude | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.theta):
            raise ValueError(f"non-finite rotation angle {self.theta}")


# ----------------------------------------------------------------- vertices

def absorption_vertex(dipole, pol, n_before, coupling):
    """<r; n-1| -mu.E |q; n> for one mode; ``dipole`` is the vector <r|mu|q>."""
    return -(np.dot(dipole, pol)) * 1j * coupling * np.sqrt(n_before)


def emission_vertex(dipole, pol, n_before, coupling):
    """<r; n+1| -mu.E |q; n> for one mode; ``dipole`` is the vector <r|mu|q>."""
    return -(np.dot(dipole, np.conj(pol))) * (-1j) * coupling * np.sqrt(n_before + 1)


def check_resonance(transition_energies, photon_energy, tol: Tolerances, labels=None):
    """Raise NearResonance if hbar*omega sits within the guard band of any |E_rg|."""
    for r, e in enumerate(np.asarray(transition_energies)):
        if e == 0:
            continue
        detuning = abs(photon_energy - abs(e))
        if detuning < tol.resonance_guard * photon_energy:
            name = labels[r] if labels is not None else r
            raise NearResonance(
                f"photon energy {photon_energy:.6e} J is within {tol.resonance_guard:g} (relative) "
                f"of the transition to level {name!r} ({abs(e):.6e} J)", detuning=detuning)


def _check_photons(f: FieldConfig):
    if f.n_photons == 0:
        warnings.warn("n_photons = 0: mode 1 is empty, the transition amplitude vanishes",
                      RuntimeWarning, stacklevel=3)


# -------------------------------------------------------- second order (M)

def amplitude_second_order_diagrams(pm: PerturbedModel, f: FieldConfig,
                                    tol: Tolerances | None = None) -> TransitionAmplitude:
    """Sum over intermediate states of both time orderings, vertex by vertex."""
    tol = tol or Tolerances()
    _check_photons(f)
    g = pm.ground_index
    Erg = pm.transition_energies()
    hw = f.photon_energy
    check_resonance(Erg, hw, tol, pm.base.labels)
    C = f.coupling_constant()
    n = f.n_photons
    mu = pm.mu_corr
    total = 0j
    for r in range(pm.n_levels):
        mu_rg = mu[:, r, g]
        mu_gr = mu[:, g, r]
        # (a) absorb from mode 1, then emit into mode 2; |I> = |r; n-1, 0>
        v1 = absorption_vertex(mu_rg, f.e1, n, C)
        v2 = emission_vertex(mu_gr, f.e2, 0, C)
        total += v2 * v1 / (hw - Erg[r])
        # (b) emit into mode 2, then absorb from mode 1; |I> = |r; n, 1>
        v1 = emission_vertex(mu_rg, f.e2, 0, C)
        v2 = absorption_vertex(mu_gr, f.e1, n, C)
        total += v2 * v1 / (-hw - Erg[r])
    return TransitionAmplitude(complex(total), AmplitudeOrder.SECOND_ORDER_DIAGRAMS, f)


def amplitude_second_order_closed(pm: PerturbedModel, f: FieldConfig,
                                  tol: Tolerances | None = None) -> TransitionAmplitude:
    """Closed form: prefactor * sum_r [E_rg Re{X_r} - i hw Im{X_r}] / (hw^2 - E_rg^2),
    with X_r = (e1 . mu^{gr}) (e2 . mu^{rg})."""
    tol = tol or Tolerances()
    _check_photons(f)
    Erg = pm.transition_energies()
    hw = f.photon_energy
    check_resonance(Erg, hw, tol, pm.base.labels)
    pref = CONST.mu0 * CONST.c ** 2 * hw * np.sqrt(f.n_photons) / f.volume
    total = pref * closed_form_sum(pm, f.e1, f.e2, hw)
    return TransitionAmplitude(complex(total), AmplitudeOrder.SECOND_ORDER_CLOSED, f)


def closed_form_sum(pm: PerturbedModel, e1, e2, photon_energy: float) -> complex:
    """sum_r [E_rg Re{X_r} - i hw Im{X_r}] / (hw^2 - E_rg^2); accepts either sign of hw."""
    g = pm.ground_index
    Erg = pm.transition_energies()
    hw = photon_energy
    X = np.einsum("i,ir->r", e1, pm.mu_corr[:, g, :]) * np.einsum("j,jr->r", e2, pm.mu_corr[:, :, g])
    return complex(np.sum((Erg * X.real - 1j * hw * X.imag) / (hw ** 2 - Erg ** 2)))


# ---------------------------------------------------------------- third order

def amplitude_third_order(model: MolecularModel, B, f: FieldConfig,
                          tol: Tolerances | None = None) -> TransitionAmplitude:
    """Amplitude linear in B with the Zeeman coupling as one of three vertices.

    All six orderings of {absorb mode 1, emit mode 2, static vertex} are summed
    over unperturbed intermediate states, excluding |a> and |b> themselves. The
    static vertex acting diagonally on |a>/|b> (a shift of the ground level)
    enters through the usual renormalization term, -V_gg * sum_I N_I / (E_a - E_I)^2,
    which vanishes when the ground state carries no permanent magnetic moment.
    """
    tol = tol or Tolerances()
    pairs = detect_degeneracy(model, tol)
    if pairs:
        raise DegenerateSpectrum(pairs)
    _check_photons(f)
    g = model.ground_index
    L = model.n_levels
    Erg = model.transition_energies()
    hw = f.photon_energy
    check_resonance(Erg, hw, tol, model.labels)
    C = f.coupling_constant()
    n = f.n_photons
    V = zeeman_matrix(model, B)
    mu = model.mu

    def A(r, q):  # mode-1 absorption, n photons before
        return absorption_vertex(mu[:, r, q], f.e1, n, C)

    def E(r, q):  # mode-2 emission, 0 photons before
        return emission_vertex(mu[:, r, q], f.e2, 0, C)

    # E_a - E_I for the photon sectors reachable from |a>
    def gap(r, sector):
        shift = {"n,0": 0.0, "n-1,0": hw, "n,1": -hw, "n-1,1": 0.0}[sector]
        return -Erg[r] + shift

    total = 0j
    for r1 in range(L):
        for r2 in range(L):
            # static first: a -> (r1; n,0) -> ... ; r1 == g would be |a> itself
            if r1 != g:
                total += E(g, r2) * A(r2, r1) * V[r1, g] / (gap(r1, "n,0") * gap(r2, "n-1,0"))
                total += A(g, r2) * E(r2, r1) * V[r1, g] / (gap(r1, "n,0") * gap(r2, "n,1"))
            # static in the middle
            total += E(g, r2) * V[r2, r1] * A(r1, g) / (gap(r1, "n-1,0") * gap(r2, "n-1,0"))
            total += A(g, r2) * V[r2, r1] * E(r1, g) / (gap(r1, "n,1") * gap(r2, "n,1"))
            # static last: r2 == g would be |b> itself
            if r2 != g:
                total += V[g, r2] * E(r2, r1) * A(r1, g) / (gap(r1, "n-1,0") * gap(r2, "n-1,1"))
                total += V[g, r2] * A(r2, r1) * E(r1, g) / (gap(r1, "n,1") * gap(r2, "n-1,1"))
    Vgg = V[g, g]
    if Vgg != 0:
        renorm = 0j
        for r in range(L):
            renorm += E(g, r) * A(r, g) / gap(r, "n-1,0") ** 2
            renorm += A(g, r) * E(r, g) / gap(r, "n,1") ** 2
        total -= Vgg * renorm
    return TransitionAmplitude(complex(total), AmplitudeOrder.THIRD_ORDER, f)


# -------------------------------------------------------------------- angles

def angle_from_amplitude(M: TransitionAmplitude, f: FieldConfig, x: ExperimentConfig,
                         sign: float = 1.0) -> RotationResult:
    """Gas rotation N |M| L / (hbar c sqrt(n)); ``sign`` attaches a direction to the magnitude."""
    if f.n_photons < 1:
        raise ValueError("the rotation angle needs at least one photon in mode 1")
    theta = x.n_molecules_N * abs(M.value) * x.length_L / (CONST.hbar * CONST.c * np.sqrt(f.n_photons))
    return RotationResult(float(np.copysign(theta, sign)) if theta else 0.0,
                          RotationMethod.VIA_AMPLITUDE, amplitude=M)


def signed_angle_from_amplitude(M: TransitionAmplitude, f: FieldConfig, x: ExperimentConfig) -> float:
    """Signed rotation carried by the imaginary (Faraday-active) part of M.

    Equals -N Im(M) L / (hbar c sqrt(n)); with this sign it reproduces the
    literal sign of ``faraday_b_term_angle``.
    """
    if f.n_photons < 1:
        raise ValueError("the rotation angle needs at least one photon in mode 1")
    return float(-x.n_molecules_N * M.value.imag * x.length_L
                 / (CONST.hbar * CONST.c * np.sqrt(f.n_photons)))


def b_term_sum(model: MolecularModel, f: FieldConfig, tol: Tolerances | None = None) -> float:
    """Field-independent factor of the B-term: sum_r w^2/(w_rg^2 - w^2) Im{...}, in C^2 m^2 / T."""
    tol = tol or Tolerances()
    pairs = detect_degeneracy(model, tol)
    if pairs:
        raise DegenerateSpectrum(pairs)
    g = model.ground_index
    E0 = model.energies
    Erg = model.transition_energies()
    hw = f.photon_energy
    check_resonance(Erg, hw, tol, model.labels)
    mu1 = np.einsum("i,ipq->pq", f.e1, model.mu)
    mu2 = np.einsum("i,ipq->pq", f.e2, model.mu)
    m3 = np.einsum("i,ipq->pq", f.k_hat, model.m)
    L = model.n_levels
    total = 0.0
    for r in range(L):
        bracket = 0j
        for p in range(L):
            if p != g:
                bracket += m3[p, g] / (E0[p] - E0[g]) * (mu1[g, r] * mu2[r, p] - mu2[g, r] * mu1[r, p])
        for s in range(L):
            if s != r:
                bracket += m3[r, s] / (E0[s] - E0[r]) * (mu1[g, r] * mu2[s, g] - mu2[g, r] * mu1[s, g])
        # w^2 / (w_rg^2 - w^2) written with energies
        total += hw ** 2 / (Erg[r] ** 2 - hw ** 2) * bracket.imag
    return total


def faraday_b_term_angle(model: MolecularModel, f: FieldConfig, x: ExperimentConfig,
                         tol: Tolerances | None = None) -> RotationResult:
    """Faraday B-term rotation angle (rad) from unperturbed moments and energies.

    theta = -(mu0 c L eta (B.k_hat) / hbar) * sum_r w^2/(w_rg^2 - w^2) Im{...}
    """
    s = b_term_sum(model, f, tol)
    B_par = float(np.dot(x.B, f.k_hat))
    pref = -CONST.mu0 * CONST.c * x.length_L * x.density_eta / CONST.hbar
    return RotationResult(float(pref * s * B_par) + 0.0, RotationMethod.B_TERM_FORMULA)
