import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faraday_qed.amplitude import (AmplitudeOrder, TransitionAmplitude, absorption_vertex,
                                   amplitude_second_order_closed, amplitude_second_order_diagrams,
                                   amplitude_third_order, angle_from_amplitude, closed_form_sum,
                                   emission_vertex, faraday_b_term_angle,
                                   signed_angle_from_amplitude)
from faraday_qed.errors import DegenerateSpectrum, NearResonance
from faraday_qed.model import CONST, DEBYE, EV, ExperimentConfig, FieldConfig, MolecularModel
from faraday_qed.perturbation import first_order_corrections, unperturbed

from conftest import off_resonant_omega, random_direction_field, random_model


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b))


def _real_model(L=3):
    mu = np.zeros((3, L, L))
    mu[0, 0, 1] = mu[0, 1, 0] = 1.2 * DEBYE
    mu[1, 0, 2] = mu[1, 2, 0] = 0.7 * DEBYE
    mu[2, 1, 2] = mu[2, 2, 1] = 0.4 * DEBYE
    mu[0, 0, 2] = mu[0, 2, 0] = 0.3 * DEBYE
    return MolecularModel(labels="gab", energies=np.array([0.0, 2.0, 3.1]) * EV, mu=mu, m=np.zeros((3, L, L)))


# ------------------------------------------------------------------ vertices

def test_vertex_factors():
    d = np.array([1.0, 2.0j, 0.0])
    pol = np.array([0.0, 1.0, 0.0])
    assert absorption_vertex(d, pol, 4, 3.0) == pytest.approx(-(2.0j) * 1j * 3.0 * 2.0)
    assert emission_vertex(d, pol, 0, 3.0) == pytest.approx(-(2.0j) * (-1j) * 3.0)
    assert absorption_vertex(d, pol, 0, 3.0) == 0


def test_zero_photons_gives_zero(three_level):
    f = FieldConfig.from_frequency(1.5 * EV / CONST.hbar, n_photons=0, volume=1e-6)
    pm = first_order_corrections(three_level, [0, 0, 0.1])
    with pytest.warns(RuntimeWarning, match="mode 1 is empty"):
        assert amplitude_second_order_diagrams(pm, f).value == 0
    with pytest.warns(RuntimeWarning):
        assert amplitude_second_order_closed(pm, f).value == 0


def test_real_moments_give_real_amplitude():
    model = _real_model()
    f = FieldConfig.from_frequency(1.1 * EV / CONST.hbar, n_photons=3, volume=1e-6)
    M = amplitude_second_order_diagrams(unperturbed(model), f).value
    assert abs(M) > 0
    assert abs(M.imag) <= 1e-14 * abs(M)


def test_two_level_half_frequency(two_level):
    f = FieldConfig.from_frequency(1.0 * EV / CONST.hbar, n_photons=5, volume=1e-6)
    pm = unperturbed(two_level)
    a = amplitude_second_order_diagrams(pm, f).value
    b = amplitude_second_order_closed(pm, f).value
    assert abs(a) > 0 and _rel(a, b) < 1e-12


def test_sample_closed_matches_diagrams(three_level, sample_field):
    pm = first_order_corrections(three_level, [0, 0, 0.1])
    a = amplitude_second_order_diagrams(pm, sample_field)
    b = amplitude_second_order_closed(pm, sample_field)
    assert a.order is AmplitudeOrder.SECOND_ORDER_DIAGRAMS
    assert b.order is AmplitudeOrder.SECOND_ORDER_CLOSED
    assert _rel(a.value, b.value) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 50))
def test_diagrams_equal_closed_form(seed, n):
    rng = np.random.default_rng(seed)
    model = random_model(rng)
    pm = first_order_corrections(model, rng.normal(size=3))
    f = random_direction_field(rng, off_resonant_omega(rng, model), n, 10 ** rng.uniform(-24, -3))
    a = amplitude_second_order_diagrams(pm, f).value
    b = amplitude_second_order_closed(pm, f).value
    assert _rel(a, b) < 1e-12


def test_isotropic_symmetric_tensor_gives_zero():
    # three equivalent excited states, one per axis, so sum_r X_r is proportional to delta_ij
    L = 4
    mu = np.zeros((3, L, L))
    for axis in range(3):
        mu[axis, 0, axis + 1] = mu[axis, axis + 1, 0] = DEBYE
    model = MolecularModel(labels="gxyz", energies=np.array([0, 2.0, 2.0, 2.0]) * EV,
                           mu=mu, m=np.zeros((3, L, L)))
    f = FieldConfig.from_frequency(1.2 * EV / CONST.hbar, 2, 1e-6, direction=[1, 1, 1])
    pm = unperturbed(model)
    M = amplitude_second_order_closed(pm, f).value
    # scale: the same field with e2 replaced by e1 (a non-orthogonal contraction)
    scale = abs(closed_form_sum(pm, f.e1, f.e1, f.photon_energy))
    assert scale > 0
    assert abs(closed_form_sum(pm, f.e1, f.e2, f.photon_energy)) <= 1e-15 * scale
    assert abs(M) <= 1e-15 * scale * CONST.mu0 * CONST.c ** 2 * f.photon_energy * np.sqrt(2) / 1e-6


def test_frequency_parity(rng):
    for _ in range(10):
        model = random_model(rng)
        pm = first_order_corrections(model, rng.normal(size=3))
        f = random_direction_field(rng, off_resonant_omega(rng, model), 1, 1e-6)
        hw = f.photon_energy
        plus = closed_form_sum(pm, f.e1, f.e2, hw)
        minus = closed_form_sum(pm, f.e1, f.e2, -hw)
        assert minus.real == pytest.approx(plus.real, rel=1e-13, abs=1e-13 * abs(plus))
        assert minus.imag == pytest.approx(-plus.imag, rel=1e-13, abs=1e-13 * abs(plus))


def test_near_resonance(three_level):
    f = FieldConfig.from_frequency(2.0 * EV * (1 + 1e-4) / CONST.hbar, 1, 1e-6)
    pm = unperturbed(three_level)
    with pytest.raises(NearResonance) as exc:
        amplitude_second_order_closed(pm, f)
    assert exc.value.detuning == pytest.approx(2.0 * EV * 1e-4, rel=1e-6)
    for fn in (amplitude_second_order_diagrams,):
        with pytest.raises(NearResonance):
            fn(pm, f)
    with pytest.raises(NearResonance):
        amplitude_third_order(three_level, [0, 0, 1], f)


def test_non_finite_amplitude_rejected(sample_field):
    with pytest.raises(ValueError):
        TransitionAmplitude(complex("nan"), AmplitudeOrder.THIRD_ORDER, sample_field)


# --------------------------------------------------------------- third order

def test_third_order_zero_field(three_level, sample_field):
    assert amplitude_third_order(three_level, [0, 0, 0], sample_field).value == 0


def test_third_order_linear(three_level, sample_field):
    B = np.array([0.02, -0.01, 0.1])
    a = amplitude_third_order(three_level, B, sample_field).value
    b = amplitude_third_order(three_level, 2 * B, sample_field).value
    assert abs(b - 2 * a) <= 1e-14 * abs(b)


def test_third_order_degenerate_rejected(sample_field):
    z = np.zeros((3, 3, 3))
    model = MolecularModel(labels="abc", energies=[0, 3e-19, 3e-19], mu=z, m=z)
    with pytest.raises(DegenerateSpectrum):
        amplitude_third_order(model, [0, 0, 1], sample_field)


def _pipeline_discrepancy(model, f, B):
    third = amplitude_third_order(model, B, f).value
    dm = (amplitude_second_order_closed(first_order_corrections(model, B), f).value
          - amplitude_second_order_closed(unperturbed(model), f).value)
    return abs(third - dm) / abs(third)


def test_third_order_matches_pipeline(three_level, sample_field):
    d = [_pipeline_discrepancy(three_level, sample_field, [0, 0, b]) for b in (1e-2, 1e-1)]
    assert d[1] < 1e-4
    assert d[1] / d[0] == pytest.approx(10.0, rel=0.05)


def test_third_order_matches_pipeline_random(rng):
    # random models carry permanent moments, so this exercises the ground-shift term too
    for _ in range(5):
        model = random_model(rng)
        f = random_direction_field(rng, off_resonant_omega(rng, model, margin=0.1), 2, 1e-6)
        B = rng.normal(size=3)
        # below ~0.1 T the subtraction M(B) - M(0) hits its roundoff floor
        d = [_pipeline_discrepancy(model, f, s * B) for s in (0.1, 1.0)]
        assert d[0] < 1e-3
        assert d[1] / d[0] == pytest.approx(10.0, rel=0.1)


# -------------------------------------------------------------------- angles

def test_angle_zero_amplitude(sample_field, sample_experiment):
    M = TransitionAmplitude(0j, AmplitudeOrder.SECOND_ORDER_CLOSED, sample_field)
    assert angle_from_amplitude(M, sample_field, sample_experiment).theta == 0.0


def test_angle_scales_with_N_and_L(sample_field):
    M = TransitionAmplitude(3e-40 + 4e-40j, AmplitudeOrder.SECOND_ORDER_CLOSED, sample_field)
    x = ExperimentConfig(length_L=0.01, n_molecules_N=7)
    t = angle_from_amplitude(M, sample_field, x).theta
    assert angle_from_amplitude(M, sample_field, x.with_molecules(14)).theta == 2 * t
    assert angle_from_amplitude(M, sample_field, x.with_length(0.02)).theta == 2 * t


def test_angle_single_molecule_length_equals_ct(sample_field):
    M = TransitionAmplitude(5e-40j, AmplitudeOrder.SECOND_ORDER_CLOSED, sample_field)
    t = 2e-12
    x = ExperimentConfig(length_L=CONST.c * t, n_molecules_N=1)
    expected = abs(M.value) * t / (CONST.hbar * np.sqrt(sample_field.n_photons))
    assert angle_from_amplitude(M, sample_field, x).theta == pytest.approx(expected, rel=1e-15)


def test_angle_sign_and_photon_precondition(sample_field):
    M = TransitionAmplitude(1e-40 + 0j, AmplitudeOrder.SECOND_ORDER_CLOSED, sample_field)
    x = ExperimentConfig()
    assert angle_from_amplitude(M, sample_field, x, sign=-1.0).theta < 0
    empty = sample_field.with_photons(0)
    with pytest.raises(ValueError):
        angle_from_amplitude(M, empty, x)
    with pytest.raises(ValueError):
        signed_angle_from_amplitude(M, empty, x)


# -------------------------------------------------------------------- B term

def test_b_term_perpendicular_field(three_level, sample_field):
    x = ExperimentConfig(B=[0.3, -0.2, 0.0], density_eta=1e20)
    assert faraday_b_term_angle(three_level, sample_field, x).theta == 0.0


def test_b_term_nonzero_for_sample(three_level, sample_field, sample_experiment):
    assert faraday_b_term_angle(three_level, sample_field, sample_experiment).theta != 0.0


def test_b_term_antisymmetric_and_linear(rng):
    for _ in range(20):
        model = random_model(rng)
        f = random_direction_field(rng, off_resonant_omega(rng, model), 1, 1e-6)
        B = rng.normal(size=3)
        x = ExperimentConfig(B=B, density_eta=1e22, length_L=0.05)
        t = faraday_b_term_angle(model, f, x).theta
        assert faraday_b_term_angle(model, f, x.with_B(-B)).theta == pytest.approx(-t, rel=1e-14)
        for alpha in (0.5, 2.0, 10.0):
            assert faraday_b_term_angle(model, f, x.with_B(alpha * B)).theta == pytest.approx(alpha * t, rel=1e-14)


def test_b_term_matches_signed_pipeline(rng):
    # real dipoles and purely imaginary off-diagonal magnetic moments, the usual closed-shell case
    for _ in range(5):
        model = random_model(rng, L=4)
        L = model.n_levels
        mu = model.mu.real.copy()
        m = 1j * model.m.imag + np.einsum("ipp->ip", model.m.real)[:, :, None] * np.eye(L)
        model = MolecularModel(labels=model.labels, energies=model.energies, mu=mu, m=m)
        f = random_direction_field(rng, off_resonant_omega(rng, model, margin=0.1), 4, 1e-6)
        b = 1e-3
        x = ExperimentConfig(B=b * f.k_hat, density_eta=4 / f.volume, n_molecules_N=4, length_L=0.01)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            M = amplitude_second_order_closed(first_order_corrections(model, x.B), f)
        signed = signed_angle_from_amplitude(M, f, x)
        bterm = faraday_b_term_angle(model, f, x).theta
        assert signed == pytest.approx(bterm, rel=1e-3)
