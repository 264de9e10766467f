import math

import numpy as np
import pytest

from sub_nyquist_radar_lib.aic.measurement_matrix import make_matrix
from sub_nyquist_radar_lib.model.radar import RadarParams
from sub_nyquist_radar_lib.model.scene import Scene, DelayClass, NoiseParams, ClutterParams
from sub_nyquist_radar_lib.model.signal import (
    AtomMode, lfm_pulse, padded_pulse, pulse_spectrum, atom, atoms, coeff_sequence, doppler_vector,
    echo_matrix, theta_matrix, add_noise, nyquist_noise, noise_level, noise_params_for, gen_clutter,
)
from sub_nyquist_radar_lib.utils.exceptions import DomainError


def test_lfm_pulse_shape_and_modulus():
    params = RadarParams(B=1e8, T=1e-4, T_p=1e-5, L=100, M=2000)
    g = lfm_pulse(params)
    assert g.shape == (1000,)
    np.testing.assert_allclose(np.abs(g), 1.0, atol=1e-12)


def test_lfm_pulse_starts_at_half_turn():
    # B T_p = 4, t_0 = -T_p / 2: phase pi B / T_p * T_p^2 / 4 = pi
    params = RadarParams(B=4.0, T=2.0, T_p=1.0, L=4, M=4)
    g = lfm_pulse(params)
    assert g.size == 4
    assert g[0] == pytest.approx(-1.0, abs=1e-12)


def test_atom_at_zero_delay_is_padded_pulse(params):
    expected = padded_pulse(params)
    for mode in AtomMode:
        np.testing.assert_allclose(atom(0.0, params, mode), expected, atol=1e-10)


def test_on_grid_atom_is_circular_shift(params):
    k = 10
    expected = np.roll(padded_pulse(params), k)
    for mode in AtomMode:
        np.testing.assert_allclose(atom(k * params.T_nyq, params, mode), expected, atol=1e-10)


def test_model_atom_spectrum(params):
    tau = 3.37 * params.T_nyq
    spectrum = np.fft.fft(atom(tau, params))
    k = np.fft.fftfreq(params.N, d=1 / params.N)
    expected = pulse_spectrum(params) * np.exp(-2j * np.pi * k * tau / params.T)
    np.testing.assert_allclose(spectrum, expected, atol=1e-9)


def test_atoms_reject_out_of_range_delays(params):
    with pytest.raises(DomainError):
        atoms([params.tau_max], params)
    with pytest.raises(DomainError):
        atoms([-1e-9], params)
    assert atoms([], params).shape == (params.N, 0)


def test_coeff_sequence_examples(params):
    single = DelayClass(1e-7, ((0.0, 1.0),))
    np.testing.assert_allclose(coeff_sequence(single, params), np.ones(params.L))

    nu = 3 * params.nu0
    conjugate_pair = DelayClass(1e-7, ((nu, 0.5 + 0.2j), (-nu, 0.5 - 0.2j)))
    assert np.max(np.abs(coeff_sequence(conjugate_pair, params).imag)) < 1e-12

    b = doppler_vector(nu, params)
    np.testing.assert_allclose(np.abs(b), 1.0)
    assert b[1] == pytest.approx(np.exp(2j * np.pi * nu * params.T))


def test_echo_factorization_and_linearity(params, three_class_scene):
    R = echo_matrix(three_class_scene, params)
    expected = atoms(three_class_scene.delays, params) @ theta_matrix(three_class_scene, params)
    np.testing.assert_allclose(R, expected, atol=1e-12)

    first = Scene(three_class_scene.classes[:1])
    rest = Scene(three_class_scene.classes[1:])
    np.testing.assert_allclose(R, echo_matrix(first, params) + echo_matrix(rest, params), atol=1e-12)
    assert np.array_equal(echo_matrix(Scene(), params), np.zeros((params.N, params.L)))


def test_physical_and_model_atoms_agree_on_grid(params):
    scene = Scene((DelayClass(20 * params.T_nyq, ((2.0 * params.nu0, 1.0),)),
                   DelayClass(90 * params.T_nyq, ((-1.0 * params.nu0, 0.5j),))))
    np.testing.assert_allclose(echo_matrix(scene, params, AtomMode.PHYSICAL),
                               echo_matrix(scene, params, AtomMode.MODEL_MATCHED), atol=1e-10)


def test_physical_and_model_atoms_agree_off_grid():
    # the sampled full-band chirp aliases at the band edges, so agreement is bounded well above zero
    params = RadarParams(B=1e8, T=5.12e-6, T_p=1.28e-6, L=64, M=128)
    assert params.N == 512
    tau = 3.37 * params.T_nyq
    physical = atom(tau, params, AtomMode.PHYSICAL)
    model = atom(tau, params, AtomMode.MODEL_MATCHED)
    assert np.linalg.norm(model - physical) / np.linalg.norm(physical) < 0.3
    np.testing.assert_allclose(np.linalg.norm(model), np.linalg.norm(padded_pulse(params)), rtol=1e-12)


def test_noiseless_snr_leaves_echo_unchanged(params, three_class_scene):
    R = echo_matrix(three_class_scene, params)
    assert np.array_equal(add_noise(R, math.inf, params, NoiseParams(seed=1)), R)


def test_noise_energy_matches_snr():
    params = RadarParams(B=1e8, T=5.12e-6, T_p=1.28e-6, L=64, M=128)
    scene = Scene((DelayClass(0.5e-6, ((1000.0, 1.0),)),))
    R = echo_matrix(scene, params)
    noise = nyquist_noise(R, 0.0, params, NoiseParams(seed=11))
    pulse_energy = np.mean(np.sum(np.abs(R) ** 2, axis=0))
    noise_energy = np.mean(np.sum(np.abs(noise) ** 2, axis=0))
    assert noise_energy / pulse_energy == pytest.approx(1.0, rel=0.02)


def test_noise_is_reproducible(params, three_class_scene):
    R = echo_matrix(three_class_scene, params)
    first = add_noise(R, 5.0, params, NoiseParams(seed=4))
    second = add_noise(R, 5.0, params, NoiseParams(seed=4))
    other = add_noise(R, 5.0, params, NoiseParams(seed=5))
    assert np.array_equal(first, second)
    assert not np.array_equal(first, other)


def test_noise_params_carry_the_psd_level(params, three_class_scene):
    R = echo_matrix(three_class_scene, params)
    noise = noise_params_for(R, 10.0, params, seed=3)
    assert noise.N0 * params.B == pytest.approx(noise_level(R, 10.0, params))
    assert noise.seed == 3
    assert noise_params_for(R, math.inf, params, seed=3).N0 == 0.0


def test_noise_needs_a_nonzero_echo(params):
    with pytest.raises(DomainError):
        noise_level(np.zeros((params.N, params.L)), 10.0, params)


def test_clutter_free_is_zero(params, gaussian, three_class_scene):
    cp = ClutterParams(n_scatterers=10, scr_db=math.inf, delay_span=(0.0, 1e-6))
    clutter = gen_clutter(params, cp, gaussian, echo_matrix(three_class_scene, params))
    assert not np.any(clutter)


def test_clutter_scaled_to_compressed_scr(params, gaussian, three_class_scene):
    R = echo_matrix(three_class_scene, params)
    cp = ClutterParams(n_scatterers=40, scr_db=-10.0, delay_span=(0.0, 1e-6), seed=9)
    clutter = gen_clutter(params, cp, gaussian, R)
    ratio = np.sum(np.abs(gaussian.data @ R) ** 2) / np.sum(np.abs(gaussian.data @ clutter) ** 2)
    assert ratio == pytest.approx(0.1, rel=1e-9)


def test_single_static_scatterer_is_constant_across_pulses(params, gaussian):
    tau = 30 * params.T_nyq
    cp = ClutterParams(n_scatterers=1, scr_db=0.0, delay_span=(tau, tau), doppler_bin_width=0.0, seed=2)
    clutter = gen_clutter(params, cp, gaussian, None)
    np.testing.assert_allclose(clutter, np.repeat(clutter[:, :1], params.L, axis=1), atol=1e-12)
    shape = np.roll(padded_pulse(params), 30)
    np.testing.assert_allclose(np.abs(clutter[:, 0]), np.abs(shape), atol=1e-10)


def test_clutter_is_reproducible(params):
    mat = make_matrix("bernoulli", params.M, params.N, seed=1)
    cp = ClutterParams(n_scatterers=20, scr_db=0.0, delay_span=(0.0, 1e-6), seed=3)
    R = echo_matrix(Scene((DelayClass(1e-7, ((0.0, 1.0),)),)), params)
    assert np.array_equal(gen_clutter(params, cp, mat, R), gen_clutter(params, cp, mat, R))
