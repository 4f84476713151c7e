"""First-order Rayleigh-Schroedinger corrections under the static-field Zeeman term."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpectrum
from .model import MolecularModel, Tolerances, _frozen, detect_degeneracy


def zeeman_matrix(model: MolecularModel, B) -> np.ndarray:
    """V = -m . B as an L x L matrix in the unperturbed eigenbasis."""
    B = np.asarray(B, dtype=float)
    return -np.einsum("i,ipq->pq", B, model.m)


@dataclass(frozen=True, eq=False)
class PerturbedModel:
    energies: np.ndarray
    mu_corr: np.ndarray
    m_corr: np.ndarray
    base: MolecularModel
    B: np.ndarray
    mixing: np.ndarray

    @property
    def ground_index(self) -> int:
        return self.base.ground_index

    @property
    def n_levels(self) -> int:
        return self.base.n_levels

    def transition_energies(self) -> np.ndarray:
        return self.energies - self.energies[self.ground_index]


def mixing_coefficients(model: MolecularModel, V: np.ndarray) -> np.ndarray:
    """c[p, n] = <p|V|n> / (E_n - E_p) for p != n, zero on the diagonal.

    Column n holds the first-order admixture of state p into the perturbed |E_n>.
    """
    E = model.energies
    dE = E[None, :] - E[:, None]  # dE[p, n] = E_n - E_p
    c = np.zeros_like(V, dtype=complex)
    off = ~np.eye(len(E), dtype=bool)
    c[off] = V[off] / dE[off]
    return c


def corrected_moments(moment: np.ndarray, c: np.ndarray) -> np.ndarray:
    """<E_m| O |E_n> to first order: O + C^H O + O C for every Cartesian component."""
    cH = c.conj().T
    return moment + np.einsum("mp,ipn->imn", cH, moment) + np.einsum("imp,pn->imn", moment, c)


def _warn_small_denominators(model: MolecularModel, tol: Tolerances) -> None:
    E = model.energies
    for i in range(len(E)):
        for j in range(i + 1, len(E)):
            thresh = max(tol.degeneracy_abs, tol.degeneracy_rel * max(abs(E[i]), abs(E[j])))
            if abs(E[i] - E[j]) < 10 * thresh:
                warnings.warn(
                    f"levels {model.labels[i]!r} and {model.labels[j]!r} are nearly degenerate "
                    f"(gap {abs(E[i] - E[j]):.3e} J); first-order corrections are ill-conditioned",
                    RuntimeWarning, stacklevel=3)


def first_order_corrections(model: MolecularModel, B, tol: Tolerances | None = None) -> PerturbedModel:
    """Energies and transition moments of the molecule corrected to first order in B."""
    tol = tol or Tolerances()
    pairs = detect_degeneracy(model, tol)
    if pairs:
        raise DegenerateSpectrum(pairs)
    _warn_small_denominators(model, tol)
    B = np.asarray(B, dtype=float)
    V = zeeman_matrix(model, B)
    c = mixing_coefficients(model, V)
    energies = model.energies + np.real(np.diag(V))
    return PerturbedModel(
        energies=_frozen(energies, float),
        mu_corr=_frozen(corrected_moments(model.mu, c)),
        m_corr=_frozen(corrected_moments(model.m, c)),
        base=model,
        B=_frozen(B, float),
        mixing=_frozen(c),
    )


def unperturbed(model: MolecularModel) -> PerturbedModel:
    """PerturbedModel at B = 0, bypassing the degeneracy check."""
    L = model.n_levels
    return PerturbedModel(energies=model.energies, mu_corr=model.mu, m_corr=model.m, base=model,
                          B=_frozen(np.zeros(3), float), mixing=_frozen(np.zeros((L, L))))
