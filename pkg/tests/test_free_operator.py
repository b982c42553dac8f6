import numpy as np
import pytest

from freefusion.errors import ContractError, ConvergenceError
from freefusion.free_operator import (
    Linearization,
    cauchy_L,
    imag_part,
    is_operator_point,
    lambda_eps,
    linearize_p2,
    operator_subordinate,
    p2_transform,
    tensor_cauchy,
    tensor_transform,
)
from freefusion.spectra import MpParams, mp_cauchy_closed, mp_density

E11 = np.diag([1.0, 0.0, 0.0])


def free_poisson_rate2(z):
    a, b = 3 - 2 * np.sqrt(2), 3 + 2 * np.sqrt(2)
    return ((z - 1) - np.sqrt(z - a) * np.sqrt(z - b)) / (2 * z)


def random_operator_point(gen):
    a = gen.standard_normal((3, 3)) + 1j * gen.standard_normal((3, 3))
    m = gen.standard_normal((3, 3))
    return (a + a.conj().T) / 2 + 1j * (m @ m.T + 0.5 * np.eye(3))


def test_p2_coefficients():
    lin = linearize_p2()
    assert lin.b0[1, 2] == lin.b0[2, 1] == -1
    assert lin.b1[0, 1] == lin.b1[1, 0] == 1
    assert lin.b2[0, 2] == lin.b2[2, 0] == 1
    assert np.count_nonzero(lin.b0) + np.count_nonzero(lin.b1) + np.count_nonzero(lin.b2) == 6


def test_linearization_rejects_asymmetric():
    with pytest.raises(ContractError):
        Linearization(np.triu(np.ones((3, 3))), np.zeros((3, 3)), np.zeros((3, 3)))


@pytest.mark.parametrize("n", [1, 3, 6])
def test_schur_complement_recovers_resolvent(gen, n):
    A = gen.standard_normal((n, n))
    B = gen.standard_normal((n, n))
    A, B = A + A.T, B + B.T
    z = 0.7 + 0.4j
    L = linearize_p2().block(A, B)
    lam = np.kron(np.diag([z, 0, 0]), np.eye(n))
    corner = np.linalg.inv(lam - L)[:n, :n]
    assert np.allclose(corner, np.linalg.inv(z * np.eye(n) - (A @ B + B @ A)), atol=1e-10)


def test_swapped_linearization_same_polynomial(gen):
    A = np.diag([1.0, 2.0])
    B = np.array([[0.0, 1.0], [1.0, 0.0]])
    z = 1 + 1j
    n = 2
    lam = np.kron(np.diag([z, 0, 0]), np.eye(n))
    c1 = np.linalg.inv(lam - linearize_p2().block(A, B))[:n, :n]
    c2 = np.linalg.inv(lam - linearize_p2().swapped().block(B, A))[:n, :n]
    assert np.allclose(c1, c2)


def test_lambda_eps_shape_and_lift():
    lam = lambda_eps(np.array([1.0, 2.0 + 0.5j]), eps=1e-3)
    assert lam.shape == (2, 3, 3)
    assert lam[0, 0, 0] == 1 + 1e-3j
    assert lam[1, 0, 0] == 2 + 0.5j
    assert lam[0, 1, 1] == 1e-3j
    with pytest.raises(ContractError):
        lambda_eps(1 - 1j)
    with pytest.raises(ContractError):
        lambda_eps(1.0, eps=0)


def test_operator_point_predicate(gen):
    assert is_operator_point(lambda_eps(1.0))
    assert not is_operator_point(np.eye(3, dtype=complex))
    b = random_operator_point(gen)
    assert np.allclose(imag_part(b), imag_part(b).conj().T)


def test_tensor_cauchy_scalar_multiple_of_identity():
    z = 1.5 + 0.2j
    out = tensor_cauchy(np.eye(3), MpParams(), z * np.eye(3))
    assert np.allclose(out, mp_cauchy_closed(MpParams(), z) * np.eye(3))


def test_tensor_cauchy_zero_coefficient(gen):
    b = random_operator_point(gen)
    assert np.allclose(tensor_cauchy(np.zeros((3, 3)), MpParams(), b), np.linalg.inv(b))


def test_tensor_cauchy_spectral_vs_quadrature(gen):
    d = mp_density(MpParams(1, 0.5), grid_points=4096)
    bj = linearize_p2().b1
    b = np.stack([random_operator_point(gen) for _ in range(4)])
    spec = tensor_cauchy(bj, MpParams(1, 0.5), b)
    quad = tensor_cauchy(bj, d, b, method="quadrature")
    assert np.max(np.abs(spec - quad)) < 1e-3


def test_tensor_cauchy_bad_method(gen):
    with pytest.raises(ContractError):
        tensor_cauchy(np.eye(3), MpParams(), np.eye(3) * 1j, method="magic")
    with pytest.raises(ContractError):
        tensor_cauchy(np.eye(3), MpParams(), np.eye(3) * 1j, method="quadrature")


def test_corner_embedding_reduces_to_scalar_free_sum():
    # b1 = b2 = e11 puts S0 + S1 in the (1, 1) slot
    gx = tensor_transform(E11, MpParams())
    gy = tensor_transform(E11, MpParams())
    z = 3 + 0.05j
    b = np.diag([z, 1j, 1j])
    w1 = operator_subordinate(gx, gy, b)
    assert gx(w1)[0, 0] == pytest.approx(free_poisson_rate2(z), abs=1e-8)
    assert np.all(np.linalg.eigvalsh(imag_part(w1) - imag_part(b)) > -1e-8)


def test_operator_subordination_iteration_cap():
    gx = tensor_transform(E11, MpParams())
    with pytest.raises(ConvergenceError):
        operator_subordinate(gx, gx, np.diag([3 + 1e-3j, 1j, 1j]), max_iter=2)


def test_cauchy_L_batch_matches_single():
    lin = linearize_p2()
    lam = lambda_eps(np.array([1.0 + 0.3j, 4.0 + 0.3j]), eps=1e-3)
    batch = cauchy_L(lin, MpParams(), MpParams(), lam)
    single = cauchy_L(lin, MpParams(), MpParams(), lam[1])
    assert np.allclose(batch[1], single, atol=1e-8)


def test_p2_transform_matches_monte_carlo(gen):
    n = 400
    X, Y = gen.standard_normal((n, n)), gen.standard_normal((n, n))
    S0, S1 = X @ X.T / n, Y @ Y.T / n
    ev = np.linalg.eigvalsh(S0 @ S1 + S1 @ S0)
    z = np.array([2 + 0.5j, 6 + 0.5j, -0.5 + 0.5j])
    mc = np.mean(1 / (z[:, None] - ev[None, :]), axis=1)
    g = p2_transform(MpParams(), MpParams())(z)
    assert np.max(np.abs(g - mc)) < 0.02


def test_asd_p2_moments(p2_bound):
    # free moments: mean 2 phi(a) phi(b), second moment 2 (phi(abab) + phi(a^2 b^2)) = 14
    assert p2_bound.mass() == pytest.approx(1.0, abs=0.02)
    assert p2_bound.moment(1) == pytest.approx(2.0, abs=0.05)
    assert p2_bound.moment(2) == pytest.approx(14.0, rel=0.03)
    lo, hi = p2_bound.support
    assert lo < 0 < hi
