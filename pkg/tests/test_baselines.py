import numpy as np
import pytest

from l1ae import baselines


def test_gaussian_variance_and_seed():
    G = baselines.gaussian_matrix(20, 500, seed=3)
    assert np.mean(G ** 2) == pytest.approx(1 / 20, rel=0.05)
    assert np.array_equal(G, baselines.gaussian_matrix(20, 500, seed=3))
    assert baselines.gaussian_matrix(1, 1, seed=0).shape == (1, 1)
    with pytest.raises(ValueError):
        baselines.gaussian_matrix(0, 5, seed=0)


def test_partial_fourier_modulus_and_layout():
    m, d = 12, 30
    rows, F = baselines.fourier_rows(m, d, seed=4)
    assert np.allclose(np.abs(F), 1 / np.sqrt(m // 2), atol=1e-14)
    k = np.arange(d)
    assert np.allclose(F, np.exp(-2j * np.pi * np.outer(rows, k) / d) / np.sqrt(m // 2))
    A = baselines.partial_fourier(m, d, seed=4)
    assert np.array_equal(A[0::2], F.real) and np.array_equal(A[1::2], F.imag)


def test_partial_fourier_dc_row():
    # find a seed whose first draw is the DC row
    for seed in range(500):
        rows, _ = baselines.fourier_rows(2, 16, seed)
        if rows[0] == 0:
            break
    A = baselines.partial_fourier(2, 16, seed)
    assert np.allclose(A[0], 1 / np.sqrt(1)) and np.allclose(A[1], 0.0)


def test_partial_fourier_errors():
    with pytest.raises(ValueError):
        baselines.partial_fourier(3, 10, 0)
    with pytest.raises(ValueError):
        baselines.partial_fourier(22, 10, 0)


def test_pca_exact_on_subspace(rng):
    X = np.zeros((40, 10))
    X[:, [1, 4, 7]] = rng.standard_normal((40, 3))
    scheme = baselines.pca_scheme(X, 3)
    assert np.allclose(scheme.matrix @ scheme.matrix.T, np.eye(3), atol=1e-8)
    assert scheme.decode == "linear"
    assert np.allclose(scheme.linear_decode(scheme.measure(X)), X, atol=1e-10)


def test_lbcs_identity_picks_heaviest_coordinates(rng):
    X = rng.random((50, 12)) * np.linspace(0.1, 2.0, 12)
    scheme = baselines.lbcs_scheme(X, 4, basis="identity")
    energy = np.sum(X ** 2, axis=0)
    assert np.array_equal(np.flatnonzero(scheme.matrix.any(axis=0)),
                          np.sort(np.argsort(-energy)[:4]))


def test_lbcs_selection_is_exact_top_m(rng):
    X = rng.random((30, 20))
    scheme = baselines.lbcs_scheme(X, 6, basis="gaussian", seed=2)
    B = baselines.lbcs_basis(20, "gaussian", 2)
    scores = baselines.lbcs_scores(X, B)
    top = sorted(range(20), key=lambda j: -scores[j])[:6]
    assert np.array_equal(scheme.matrix, B[sorted(top)])


def test_lbcs_permutation_invariant(rng):
    X = rng.random((30, 16))
    a = baselines.lbcs_scheme(X, 5, basis="dct")
    b = baselines.lbcs_scheme(X[rng.permutation(30)], 5, basis="dct")
    assert np.array_equal(a.matrix, b.matrix)


def test_lbcs_errors(rng):
    with pytest.raises(ValueError):
        baselines.lbcs_scheme(rng.random((5, 4)), 5)
    with pytest.raises(ValueError):
        baselines.lbcs_basis(4, "wavelet", 0)


def test_scheme_decoders(rng):
    A = baselines.gaussian_matrix(10, 30, seed=1)
    x = np.zeros(30)
    x[[3, 17]] = [0.6, 0.8]
    scheme = baselines.MeasurementScheme("gaussian", A, "seed=1")
    assert np.allclose(scheme.decode_one(A @ x), x, atol=1e-10)
    lin = baselines.MeasurementScheme("gaussian", A, decode="linear")
    z = lin.decode_one(A @ x)
    assert np.allclose(A @ z, A @ x) and np.linalg.norm(z) <= np.linalg.norm(x)
    with pytest.raises(ValueError):
        baselines.MeasurementScheme("random", A)
    with pytest.raises(ValueError):
        baselines.MeasurementScheme("gaussian", A, decode="omp")
