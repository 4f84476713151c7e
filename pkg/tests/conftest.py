import numpy as np
import pytest

from faraday_qed.model import (BOHR_MAGNETON, CONST, DEBYE, EV, ExperimentConfig, FieldConfig,
                               MolecularModel, load_model, sample_model_path)

# photon energy used with the 3-level sample (below both transitions at 2.0 and 2.6 eV)
SAMPLE_PHOTON_EV = 1.5


def hermitian(rng, L, scale, real_diag=True):
    a = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
    h = 0.5 * (a + a.conj().T)
    return scale * h


def random_model(rng, L=None, min_gap_ev=0.3, max_ev=4.0):
    """Random non-degenerate molecule with complex Hermitian moments.

    Excited energies are kept away from each other by ``min_gap_ev``.
    """
    L = L or int(rng.integers(2, 6))
    while True:
        exc = np.sort(rng.uniform(1.0, max_ev, size=L - 1))
        if np.all(np.diff(np.concatenate([[0.0], exc])) > min_gap_ev):
            break
    energies = np.concatenate([[0.0], exc]) * EV
    mu = np.array([hermitian(rng, L, DEBYE) for _ in range(3)])
    m = np.array([hermitian(rng, L, BOHR_MAGNETON) for _ in range(3)])
    labels = [f"s{i}" for i in range(L)]
    return MolecularModel(labels=labels, energies=energies, mu=mu, m=m, ground_index=0)


def off_resonant_omega(rng, model, margin=0.05):
    """A photon frequency at least ``margin`` (relative) away from every transition."""
    Erg = model.transition_energies()[1:]
    while True:
        hw = rng.uniform(0.2 * EV, 1.5 * Erg.max())
        if np.all(np.abs(hw - Erg) > margin * hw):
            return hw / CONST.hbar


def random_direction_field(rng, omega, n_photons, volume):
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    e1 = rng.normal(size=3)
    e1 -= (e1 @ d) * d
    return FieldConfig.from_frequency(omega, n_photons, volume, direction=d, e1=e1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def three_level():
    return load_model(sample_model_path("three_level"))


@pytest.fixture(scope="session")
def two_level():
    return load_model(sample_model_path("two_level"))


@pytest.fixture
def sample_field():
    return FieldConfig.from_frequency(SAMPLE_PHOTON_EV * EV / CONST.hbar, n_photons=10, volume=1e-6)


@pytest.fixture
def sample_experiment(sample_field):
    N = 10
    return ExperimentConfig(B=[0.0, 0.0, 0.1], length_L=0.01,
                            density_eta=N / sample_field.volume, n_molecules_N=N)


# filled by test_acceptance.py, echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
