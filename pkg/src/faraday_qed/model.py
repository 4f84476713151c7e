"""Domain types, constants, model-file ingestion and validation.

All quantities are stored in SI units. Model files may declare energies in eV,
electric dipoles in debye and magnetic dipoles in Bohr magnetons; these are
converted on load by exact multiplication.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import HermiticityViolation, ParseError, ShapeError, UnitError


@dataclass(frozen=True)
class PhysicalConstants:
    # CODATA 2018; mu0*eps0*c**2 == 1 to ~4e-14
    hbar: float = 1.054571817e-34
    c: float = 299792458.0
    mu0: float = 1.25663706212e-6
    eps0: float = 8.8541878128e-12


CONST = PhysicalConstants()

EV = 1.602176634e-19          # J
DEBYE = 3.33564095e-30        # C m
BOHR_MAGNETON = 9.2740100783e-24  # J/T

ENERGY_UNITS = {"J": 1.0, "eV": EV}
ELECTRIC_DIPOLE_UNITS = {"C*m": 1.0, "C m": 1.0, "C·m": 1.0, "Cm": 1.0, "debye": DEBYE, "D": DEBYE}
MAGNETIC_DIPOLE_UNITS = {"J/T": 1.0, "bohr_magneton": BOHR_MAGNETON, "muB": BOHR_MAGNETON}

# load_model(units=...) tags
UNIT_SYSTEMS = {
    "file": None,
    "si": {"energy": "J", "electric_dipole": "C*m", "magnetic_dipole": "J/T"},
    "spectroscopic": {"energy": "eV", "electric_dipole": "debye", "magnetic_dipole": "bohr_magneton"},
}

AXES = ("x", "y", "z")


def ev_to_joule(e):
    return e * EV


def joule_to_ev(e):
    return e / EV


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def _unit_vector_ok(v, tol=1e-12):
    return abs(np.linalg.norm(v) - 1.0) <= tol


@dataclass(frozen=True)
class Tolerances:
    degeneracy_abs: float = 1e-30   # J
    degeneracy_rel: float = 1e-9
    # relative to hbar*omega: |hbar*omega - |E_rg|| < resonance_guard * hbar*omega is rejected
    resonance_guard: float = 1e-3
    hermiticity_rel: float = 1e-12

    def __post_init__(self):
        for name in ("degeneracy_abs", "degeneracy_rel", "resonance_guard", "hermiticity_rel"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name} must be strictly positive")


TOLERANCE_PROFILES = {
    "default": Tolerances(),
    "strict": Tolerances(degeneracy_abs=1e-28, degeneracy_rel=1e-7, resonance_guard=1e-2, hermiticity_rel=1e-14),
    "loose": Tolerances(degeneracy_abs=1e-32, degeneracy_rel=1e-11, resonance_guard=1e-4, hermiticity_rel=1e-9),
}

TOLERANCE_ENV_VAR = "FARADAY_QED_TOLERANCES"


def default_tolerances() -> Tolerances:
    """Tolerance profile named by $FARADAY_QED_TOLERANCES, else 'default'."""
    name = os.environ.get(TOLERANCE_ENV_VAR, "default")
    try:
        return TOLERANCE_PROFILES[name]
    except KeyError:
        raise ValueError(
            f"unknown tolerance profile {name!r} in ${TOLERANCE_ENV_VAR}; "
            f"choose from {sorted(TOLERANCE_PROFILES)}"
        ) from None


def check_hermitian(a: np.ndarray, rel: float, what: str = "matrix") -> None:
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    dev = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    if dev > rel * scale:
        raise HermiticityViolation(f"{what} is not Hermitian: max |A - A^H| = {dev:.3e} (scale {scale:.3e})")


@dataclass(frozen=True, eq=False)
class MolecularModel:
    """Finite set of molecular eigenstates with dipole transition moments.

    ``mu`` and ``m`` have shape (3, L, L): Cartesian component first, then
    ``mu[i, p, q] = <p| mu_i |q>``.
    """

    labels: tuple
    energies: np.ndarray
    mu: np.ndarray
    m: np.ndarray
    ground_index: int = 0
    hermiticity_rel: float = 1e-12

    def __post_init__(self):
        energies = _frozen(self.energies, float)
        mu = _frozen(self.mu)
        m = _frozen(self.m)
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "labels", tuple(self.labels))
        L = energies.shape[0]
        if energies.ndim != 1 or L < 2:
            raise ShapeError("a model needs at least two levels")
        if len(self.labels) != L:
            raise ShapeError(f"{len(self.labels)} labels for {L} levels")
        if len(set(self.labels)) != L:
            raise ParseError("level labels must be unique")
        for name, arr in (("mu", mu), ("m", m)):
            if arr.shape != (3, L, L):
                raise ShapeError(f"{name} has shape {arr.shape}, expected (3, {L}, {L})")
            if not np.all(np.isfinite(arr)):
                raise ParseError(f"{name} contains non-finite entries")
        if not np.all(np.isfinite(energies)):
            raise ParseError("energies must be finite")
        if not 0 <= self.ground_index < L:
            raise ShapeError(f"ground_index {self.ground_index} out of range")
        if energies[self.ground_index] != energies.min():
            raise ParseError("ground level does not have the minimum energy")
        for name, arr in (("mu", mu), ("m", m)):
            for i, ax in enumerate(AXES):
                check_hermitian(arr[i], self.hermiticity_rel, f"{name}_{ax}")

    @property
    def n_levels(self) -> int:
        return self.energies.shape[0]

    def transition_energies(self) -> np.ndarray:
        """E_r - E_g for every level r."""
        return self.energies - self.energies[self.ground_index]

    def __eq__(self, other):
        if not isinstance(other, MolecularModel):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.ground_index == other.ground_index
            and np.array_equal(self.energies, other.energies)
            and np.array_equal(self.mu, other.mu)
            and np.array_equal(self.m, other.m)
        )

    __hash__ = None


def _vec3(v, name):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ShapeError(f"{name} must be a 3-vector")
    return v


@dataclass(frozen=True, eq=False)
class FieldConfig:
    """Two forward modes sharing wave vector ``k`` with real polarizations ``e1`` and ``e2``."""

    k: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    n_photons: int
    volume: float

    def __post_init__(self):
        k = _frozen(_vec3(self.k, "k"), float)
        e1 = _frozen(_vec3(self.e1, "e1"), float)
        e2 = _frozen(_vec3(self.e2, "e2"), float)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "e1", e1)
        object.__setattr__(self, "e2", e2)
        tol = 1e-12
        if not (_unit_vector_ok(e1, tol) and _unit_vector_ok(e2, tol)):
            raise ValueError("polarization vectors must be unit length")
        kn = np.linalg.norm(k)
        if not kn > 0:
            raise ValueError("wave vector must be nonzero")
        if abs(e1 @ e2) > tol or abs(e1 @ k) > tol * kn or abs(e2 @ k) > tol * kn:
            raise ValueError("e1, e2 and k must be mutually orthogonal")
        if int(self.n_photons) != self.n_photons or self.n_photons < 0:
            raise ValueError("n_photons must be a nonnegative integer")
        object.__setattr__(self, "n_photons", int(self.n_photons))
        if not self.volume > 0:
            raise ValueError("quantization volume must be positive")

    @classmethod
    def from_frequency(cls, omega, n_photons, volume, direction=(0.0, 0.0, 1.0), e1=None, e2=None):
        """Build the field from an angular frequency and propagation direction.

        When ``e1``/``e2`` are omitted the lab convention x, y for k along z is
        used; for other directions an orthonormal pair is completed from ``e1``
        (or from the lab x axis).
        """
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        if e1 is None:
            trial = np.array([1.0, 0.0, 0.0])
            if abs(trial @ d) > 0.9:
                trial = np.array([0.0, 1.0, 0.0])
            e1 = trial - (trial @ d) * d
        e1 = np.asarray(e1, dtype=float)
        e1 = e1 / np.linalg.norm(e1)
        if e2 is None:
            e2 = np.cross(d, e1)
        e2 = np.asarray(e2, dtype=float)
        e2 = e2 / np.linalg.norm(e2)
        k = (omega / CONST.c) * d
        return cls(k=k, e1=e1, e2=e2, n_photons=n_photons, volume=volume)

    @property
    def omega(self) -> float:
        return CONST.c * float(np.linalg.norm(self.k))

    @property
    def photon_energy(self) -> float:
        return CONST.hbar * self.omega

    @property
    def k_hat(self) -> np.ndarray:
        return self.k / np.linalg.norm(self.k)

    def coupling_constant(self) -> float:
        """Field amplitude per photon, sqrt(hbar*omega / (2 eps0 V)), in V/m."""
        return math.sqrt(self.photon_energy / (2.0 * CONST.eps0 * self.volume))

    def with_frequency(self, omega) -> "FieldConfig":
        return FieldConfig(k=(omega / CONST.c) * self.k_hat, e1=self.e1, e2=self.e2,
                           n_photons=self.n_photons, volume=self.volume)

    def with_photons(self, n) -> "FieldConfig":
        return FieldConfig(k=self.k, e1=self.e1, e2=self.e2, n_photons=n, volume=self.volume)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    B: np.ndarray = field(default_factory=lambda: np.zeros(3))
    length_L: float = 1.0
    density_eta: float = 0.0
    n_molecules_N: int = 1

    def __post_init__(self):
        object.__setattr__(self, "B", _frozen(_vec3(self.B, "B"), float))
        if not self.length_L > 0:
            raise ValueError("path length must be positive")
        if not self.density_eta >= 0:
            raise ValueError("number density must be nonnegative")
        if int(self.n_molecules_N) != self.n_molecules_N or self.n_molecules_N < 1:
            raise ValueError("molecule count must be a positive integer")
        object.__setattr__(self, "n_molecules_N", int(self.n_molecules_N))

    def with_B(self, B) -> "ExperimentConfig":
        return ExperimentConfig(B=B, length_L=self.length_L, density_eta=self.density_eta,
                                n_molecules_N=self.n_molecules_N)

    def with_molecules(self, N) -> "ExperimentConfig":
        return ExperimentConfig(B=self.B, length_L=self.length_L, density_eta=self.density_eta,
                                n_molecules_N=N)

    def with_length(self, L) -> "ExperimentConfig":
        return ExperimentConfig(B=self.B, length_L=L, density_eta=self.density_eta,
                                n_molecules_N=self.n_molecules_N)


def detect_degeneracy(model: MolecularModel, tol: Tolerances | None = None) -> list[tuple[int, int]]:
    """All index pairs (i, j), i < j, whose energies coincide within tolerance."""
    tol = tol or Tolerances()
    E = model.energies
    pairs = []
    for i in range(len(E)):
        for j in range(i + 1, len(E)):
            thresh = max(tol.degeneracy_abs, tol.degeneracy_rel * max(abs(E[i]), abs(E[j])))
            if abs(E[i] - E[j]) < thresh:
                pairs.append((i, j))
    return pairs


# ---------------------------------------------------------------- file I/O

def _parse_complex_matrix(obj, L, where):
    if not isinstance(obj, list) or len(obj) != L:
        raise ShapeError(f"{where}: expected {L} rows")
    out = np.empty((L, L), dtype=complex)
    for p, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != L:
            raise ShapeError(f"{where}: row {p} must have {L} entries")
        for q, z in enumerate(row):
            if (not isinstance(z, (list, tuple)) or len(z) != 2
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in z)):
                raise ParseError(f"{where}[{p}][{q}]: complex entries must be [re, im] number pairs")
            out[p, q] = complex(z[0], z[1])
    return out


def _resolve_units(doc_units, units):
    if units not in UNIT_SYSTEMS:
        raise UnitError(f"unknown unit-system tag {units!r}; choose from {sorted(UNIT_SYSTEMS)}")
    chosen = UNIT_SYSTEMS[units]
    if chosen is None:
        if not isinstance(doc_units, dict):
            raise ParseError("missing 'units' block")
        chosen = doc_units
    try:
        e = ENERGY_UNITS[chosen.get("energy", "J")]
        d = ELECTRIC_DIPOLE_UNITS[chosen.get("electric_dipole", "C*m")]
        b = MAGNETIC_DIPOLE_UNITS[chosen.get("magnetic_dipole", "J/T")]
    except KeyError as exc:
        raise UnitError(f"unknown unit {exc.args[0]!r}") from None
    return e, d, b


def model_from_dict(doc: dict, units: str = "file", tol: Tolerances | None = None) -> MolecularModel:
    tol = tol or Tolerances()
    if not isinstance(doc, dict):
        raise ParseError("model document must be a JSON object")
    e_scale, d_scale, b_scale = _resolve_units(doc.get("units"), units)
    levels = doc.get("levels")
    if not isinstance(levels, list) or not levels:
        raise ParseError("'levels' must be a non-empty list")
    labels, energies = [], []
    for lv in levels:
        if not isinstance(lv, dict) or "label" not in lv or "energy" not in lv:
            raise ParseError("each level needs 'label' and 'energy'")
        if not isinstance(lv["energy"], (int, float)) or isinstance(lv["energy"], bool):
            raise ParseError(f"level {lv['label']!r}: energy must be a number")
        labels.append(str(lv["label"]))
        energies.append(float(lv["energy"]) * e_scale)
    L = len(labels)
    if L < 2:
        raise ShapeError("a model needs at least two levels")
    ground = doc.get("ground")
    if ground not in labels:
        raise ParseError(f"ground label {ground!r} is not among the levels")
    mats = {}
    for key, scale in (("mu", d_scale), ("m", b_scale)):
        block = doc.get(key)
        if not isinstance(block, dict):
            raise ParseError(f"missing '{key}' block")
        comps = []
        for ax in AXES:
            if ax not in block:
                raise ParseError(f"'{key}' lacks component {ax!r}")
            comps.append(_parse_complex_matrix(block[ax], L, f"{key}.{ax}") * scale)
        mats[key] = np.array(comps)
    return MolecularModel(labels=tuple(labels), energies=np.array(energies), mu=mats["mu"],
                          m=mats["m"], ground_index=labels.index(ground),
                          hermiticity_rel=tol.hermiticity_rel)


def load_model(path, units: str = "file", tol: Tolerances | None = None) -> MolecularModel:
    """Read a model file and return it in SI units.

    ``units`` is a unit-system tag: ``"file"`` honours the file's own
    ``units`` block, ``"si"`` and ``"spectroscopic"`` override it.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read model file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return model_from_dict(doc, units=units, tol=tol)


def model_to_dict(model: MolecularModel) -> dict:
    """SI-unit document that reparses to an identical model."""

    def mat(a):
        return [[[float(z.real), float(z.imag)] for z in row] for row in a]

    return {
        "units": {"energy": "J", "electric_dipole": "C*m", "magnetic_dipole": "J/T"},
        "levels": [{"label": lab, "energy": float(e)} for lab, e in zip(model.labels, model.energies)],
        "ground": model.labels[model.ground_index],
        "mu": {ax: mat(model.mu[i]) for i, ax in enumerate(AXES)},
        "m": {ax: mat(model.m[i]) for i, ax in enumerate(AXES)},
    }


def save_model(model: MolecularModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1))


def sample_model_path(name: str) -> Path:
    """Path of a shipped sample model: ``"two_level"`` or ``"three_level"``."""
    return Path(__file__).parent / "data" / f"{name}.json"
