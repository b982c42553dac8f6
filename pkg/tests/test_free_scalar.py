import numpy as np
import pytest

from freefusion.errors import ContractError, ConvergenceError, SingularityError
from freefusion.free_scalar import (
    ScalarTransform,
    as_transform,
    asd_p1,
    h_transform,
    subordinate_pair,
    sum_transform,
)
from freefusion.spectra import MpParams, mp_density


def semicircle(var):
    def g(z):
        z = np.asarray(z, dtype=complex)
        r = 2 * np.sqrt(var)
        return (z - np.sqrt(z - r) * np.sqrt(z + r)) / (2 * var)
    return g


def free_poisson_rate2(z):
    z = np.asarray(z, dtype=complex)
    a, b = 3 - 2 * np.sqrt(2), 3 + 2 * np.sqrt(2)
    return ((z - 1) - np.sqrt(z - a) * np.sqrt(z - b)) / (2 * z)


def test_semicircles_add_variances():
    z = np.array([0.3 + 0.5j, 2 + 0.1j, -1 + 1j])
    g = sum_transform(semicircle(1.0), semicircle(0.5))(z)
    assert np.allclose(g, semicircle(1.5)(z), atol=1e-9)


def test_free_poisson_sum_pointwise():
    z = np.array([1 + 0.5j, 3 + 1e-3j, 6 + 0.1j])
    g = sum_transform(MpParams(), MpParams())(z)
    assert np.allclose(g, free_poisson_rate2(z), atol=1e-8)


def test_subordination_identities():
    b = 2.0 + 0.3j
    gx, gy = as_transform(MpParams(1, 0.5)), as_transform(MpParams(2, 1.0))
    w1, w2 = subordinate_pair(gx, gy, b)
    assert gx(w1) == pytest.approx(gy(w2), abs=1e-9)
    # w1 + w2 = b + 1 / G(b)
    assert w1 + w2 == pytest.approx(b + 1 / gx(w1), abs=1e-8)
    assert w1.imag >= b.imag and w2.imag >= b.imag


def test_subordination_vectorized_shape():
    b = np.array([[1 + 1j, 2 + 1j], [3 + 0.5j, 4 + 0.1j]])
    w1, w2 = subordinate_pair(MpParams(), MpParams(), b)
    assert w1.shape == b.shape and w2.shape == b.shape


def test_subordination_requires_upper_half_plane():
    with pytest.raises(ContractError):
        subordinate_pair(MpParams(), MpParams(), 1.0 + 0j)


def test_subordination_iteration_cap():
    with pytest.raises(ConvergenceError) as info:
        subordinate_pair(MpParams(), MpParams(), 3 + 1e-3j, max_iter=2)
    assert info.value.residual > 0
    assert info.value.where is not None


def test_h_transform_singular():
    with pytest.raises(SingularityError):
        h_transform(ScalarTransform(lambda z: np.zeros_like(z)), 1j)


def test_as_transform_rejects_junk():
    with pytest.raises(ContractError):
        as_transform(3.0)


def test_tabulated_input_reflects_to_lower_half_plane():
    g = as_transform(mp_density(MpParams()))
    z = 2 + 0.5j
    assert g(np.conj(z)) == pytest.approx(np.conj(g(z)))


def test_asd_p1_against_free_poisson():
    d = asd_p1(MpParams(), MpParams())
    x = d.grid
    exact = np.maximum(0, -free_poisson_rate2(x + 1e-4j).imag / np.pi)
    assert np.max(np.abs(d.values - exact)) < 1e-6
    lo, hi = d.support
    assert lo == pytest.approx(3 - 2 * np.sqrt(2), abs=0.05)
    assert hi == pytest.approx(3 + 2 * np.sqrt(2), abs=0.05)
    assert d.mass() == pytest.approx(1.0, abs=2e-3)
    assert d.moment(1) == pytest.approx(2.0, abs=5e-3)


def test_asd_p1_tabulated_inputs_agree_with_closed_form():
    grid = np.linspace(0, 6, 150)
    tab = mp_density(MpParams(1, 0.5), grid_points=512)
    d_tab = asd_p1(tab, tab, grid=grid, eps=1e-2)
    ref = asd_p1(MpParams(1, 0.5), MpParams(1, 0.5), grid=grid, eps=1e-2)
    assert np.max(np.abs(d_tab.values - ref.values)) < 5e-3


def test_asd_p1_convergence_error_names_grid_points():
    with pytest.raises(ConvergenceError, match="grid abscissae"):
        asd_p1(MpParams(), MpParams(), grid=np.linspace(0, 6, 5), max_iter=3)
