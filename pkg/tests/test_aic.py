import numpy as np
import pytest

from sub_nyquist_radar_lib.aic.measurement_matrix import (
    MatrixKind, MeasurementMatrix, MeasurementMatrixFactory, PartialFourierMatrix, RandomDemodMatrix,
    make_matrix, compress,
)
from sub_nyquist_radar_lib.aic.properties import (
    compressed_noise_stats, com_ratio, com_test, rank_check, rank_probability, inverse_dft_matrix,
    xampling_degeneracy_check,
)
from sub_nyquist_radar_lib.delay_est.beamspace import steering_matrix
from sub_nyquist_radar_lib.model.radar import RadarParams
from sub_nyquist_radar_lib.model.signal import atoms, padded_pulse, pulse_spectrum
from sub_nyquist_radar_lib.utils.exceptions import ConfigError, ContractViolation


def test_partial_fourier_rows_are_dft_rows():
    mat = PartialFourierMatrix(8, 32)
    np.testing.assert_allclose(mat.data[0], np.ones(32))
    np.testing.assert_allclose(mat.data, np.fft.fft(np.eye(32))[:8], atol=1e-12)
    normalized = PartialFourierMatrix(8, 32, normalized=True)
    np.testing.assert_allclose(normalized.data @ normalized.data.conj().T, np.eye(8), atol=1e-12)


def test_random_demod_from_chips():
    mat = MeasurementMatrixFactory.from_chips([1, -1, 1, 1], M=2)
    expected = np.array([[1, -1, 0, 0], [0, 0, 1, 1]]) / np.sqrt(2)
    np.testing.assert_allclose(mat.data, expected)


def test_random_demod_needs_divisible_length():
    with pytest.raises(ConfigError):
        RandomDemodMatrix(3, 32, seed=0)


def test_random_demod_block_structure():
    mat = make_matrix("random_demod", 8, 64, seed=1)
    for m in range(8):
        support = np.flatnonzero(mat.data[m])
        np.testing.assert_array_equal(support, np.arange(8 * m, 8 * m + 8))
    np.testing.assert_allclose(np.abs(mat.data[mat.data != 0]), 1 / np.sqrt(8))


def test_bernoulli_entries():
    mat = make_matrix(MatrixKind.BERNOULLI, 16, 64, seed=2)
    np.testing.assert_allclose(np.abs(mat.data), 0.25)
    assert np.all(mat.data.imag == 0)


def test_gaussian_columns_have_unit_energy_on_average():
    mat = make_matrix("gaussian", 128, 256, seed=4)
    assert np.mean(np.sum(np.abs(mat.data) ** 2, axis=0)) == pytest.approx(1.0, rel=0.03)


def test_matrix_generation_is_seeded():
    assert np.array_equal(make_matrix("gaussian", 4, 16, seed=1).data, make_matrix("gaussian", 4, 16, seed=1).data)
    assert not np.array_equal(make_matrix("gaussian", 4, 16, seed=1).data, make_matrix("gaussian", 4, 16, seed=2).data)


def test_invalid_matrix_requests():
    with pytest.raises(ConfigError):
        make_matrix("sparse", 4, 16)
    with pytest.raises(ConfigError):
        make_matrix("gaussian", 16, 16)


def test_dump_writes_little_endian_pairs(tmp_path):
    mat = make_matrix("gaussian", 4, 16, seed=8)
    path = tmp_path / "matrix.bin"
    mat.dump(path)
    assert path.stat().st_size == 4 * 16 * 16
    pairs = np.fromfile(path, dtype="<f8").reshape(4, 16, 2)
    np.testing.assert_array_equal(pairs[..., 0], mat.data.real)
    np.testing.assert_array_equal(pairs[..., 1], mat.data.imag)
    loaded = MeasurementMatrix.load(path, MatrixKind.GAUSSIAN, 4, 16)
    np.testing.assert_array_equal(loaded.data, mat.data)


def test_compress_matches_explicit_sum(rng):
    mat = make_matrix("gaussian", 3, 8, seed=5)
    R = rng.standard_normal((8, 4)) + 1j * rng.standard_normal((8, 4))
    S = compress(mat, R).samples
    expected = np.zeros((3, 4), dtype=complex)
    for m in range(3):
        for l in range(4):
            for n in range(8):
                expected[m, l] += mat.data[m, n] * R[n, l]
    np.testing.assert_allclose(S, expected, atol=1e-12)


def test_compress_is_linear(rng, gaussian, params):
    shape = (params.N, params.L)
    R = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    noise = rng.standard_normal(shape)
    clutter = rng.standard_normal(shape)
    combined = compress(gaussian, R, noise, clutter)
    assert combined.with_clutter
    np.testing.assert_allclose(combined.samples,
                               compress(gaussian, R).samples + compress(gaussian, noise).samples
                               + compress(gaussian, clutter).samples, atol=1e-10)
    assert not np.any(compress(gaussian, np.zeros(shape)).samples)


def test_compress_rejects_mismatched_shapes(gaussian, params):
    with pytest.raises(ContractViolation):
        compress(gaussian, np.zeros((params.N + 1, params.L)))
    with pytest.raises(ContractViolation):
        compress(gaussian, np.zeros((params.N, params.L)), noise_nyq=np.zeros((params.N, params.L + 1)))


def test_partial_fourier_compresses_to_spectrum_samples(params):
    mat = PartialFourierMatrix(params.M, params.N)
    x = atoms([12 * params.T_nyq], params)
    expected = np.fft.fft(np.roll(padded_pulse(params), 12))[:params.M]
    np.testing.assert_allclose(compress(mat, x).samples[:, 0], expected, atol=1e-9)


def test_compressed_noise_variance_gaussian():
    mat = make_matrix("gaussian", 64, 256, seed=6)
    report = compressed_noise_stats(mat, N0=1e-9, B=1e8, trials=10_000, seed=1)
    assert report.nominal_variance == pytest.approx(0.4)
    assert report.mean_variance == pytest.approx(0.4, rel=0.05)
    assert report.matches_nominal


def test_compressed_noise_variance_zero_and_unnormalized():
    mat = PartialFourierMatrix(16, 64)
    zero = compressed_noise_stats(mat, N0=0.0, B=1e8, trials=1000)
    assert zero.mean_variance == 0
    report = compressed_noise_stats(mat, N0=1e-8, B=1e8, trials=1000)
    assert report.mean_variance == pytest.approx(64.0, rel=0.1)
    assert not report.matches_nominal
    with pytest.raises(ContractViolation):
        compressed_noise_stats(mat, N0=1e-8, B=1e8, trials=10)


def test_com_tail_decreases_with_measurements():
    tails = [com_test("gaussian", M, 64, 0.5, trials=2000, seed=3).empirical_tail for M in (4, 8, 16, 32)]
    assert all(a > b for a, b in zip(tails, tails[1:]))


def test_com_tail_vanishes_for_wide_epsilon():
    report = com_test("gaussian", 128, 256, 0.99, trials=200, seed=1)
    assert report.empirical_tail == 0
    assert report.bound_exponent is None


def test_com_partial_fourier_concentrates_basis_vectors():
    mat = PartialFourierMatrix(8, 32)
    e = np.zeros(32)
    e[5] = 1
    assert com_ratio(mat, e) == pytest.approx(8.0)


def test_com_epsilon_range():
    with pytest.raises(ContractViolation):
        com_test("gaussian", 4, 16, 1.0, trials=10)


def test_rank_check_duplicate_and_oversized(params, gaussian):
    Psi = atoms([1e-7, 3e-7], params)
    assert rank_check(gaussian, Psi).full_rank
    duplicated = np.hstack([Psi, Psi[:, :1]])
    report = rank_check(gaussian, duplicated)
    assert not report.full_rank
    assert report.margin < 1

    small = make_matrix("gaussian", 2, params.N, seed=0)
    oversized = rank_check(small, atoms([1e-7, 2e-7, 3e-7], params))
    assert not oversized.full_rank
    assert "exceeds" in oversized.diagnostic


def test_rank_check_agrees_with_gram_determinant(rng):
    params = RadarParams.from_samples(N=32, M=8, L=4)
    for trial in range(20):
        mat = make_matrix("gaussian", 8, 32, seed=trial)
        taus = rng.uniform(0, params.tau_max, 3)
        if trial % 2:
            taus[2] = taus[0]
        MPsi = mat.data @ atoms(taus, params)
        gram = MPsi.conj().T @ MPsi
        determinant = abs(np.linalg.det(gram / np.trace(gram).real))
        assert rank_check(mat, atoms(taus, params)).full_rank == (determinant > 1e-12)


def test_rank_probability():
    params = RadarParams.from_samples(N=32, M=4, L=4)
    assert rank_probability("gaussian", params, 4, trials=50, seed=2).success_rate >= 0.9
    assert rank_probability("gaussian", params.with_measurements(8), 2, trials=50, seed=2).success_rate == 1.0
    assert rank_probability("gaussian", params, 5, trials=10).success_rate == 0.0


@pytest.mark.parametrize("M, N", [(16, 64), (64, 256), (128, 512)])
def test_partial_fourier_degenerates_to_spectrum_samples(M, N, rng):
    params = RadarParams.from_samples(N=N, M=M, L=8)
    A = steering_matrix(rng.uniform(0, 0.75, 4), N)
    ok, residual = xampling_degeneracy_check(PartialFourierMatrix(M, N), pulse_spectrum(params), A)
    assert ok
    assert residual < 1e-10


def test_degeneracy_check_negative_control(rng):
    params = RadarParams.from_samples(N=64, M=16, L=8)
    A = steering_matrix(rng.uniform(0, 0.75, 2), 64)
    mat = make_matrix("gaussian", 16, 64, seed=0)
    with pytest.raises(ContractViolation):
        xampling_degeneracy_check(mat, pulse_spectrum(params), A)
    ok, residual = xampling_degeneracy_check(mat, pulse_spectrum(params), A, strict=False)
    assert not ok
    assert residual > 1e-3


def test_full_dft_times_inverse_is_identity():
    N = 16
    np.testing.assert_allclose(np.fft.fft(np.eye(N)) @ inverse_dft_matrix(N), np.eye(N), atol=1e-12)
