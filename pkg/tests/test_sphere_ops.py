import json

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad
from scipy.special import sph_harm_y

from geomomentum.geometry import PhysicalParams
from geomomentum.sphere_ops import (
    BasisError,
    BasisSpec,
    OperatorMatrix,
    build_hamiltonian,
    build_laplace_beltrami,
    build_momentum,
    build_operator_set,
    build_position,
    hermiticity_error,
    operator_from_dict,
)


def _index2(basis, l):
    return int(np.flatnonzero(basis.ms == l)[0])


def _index3(basis, l, m):
    return int(np.flatnonzero((basis.levels == l) & (basis.ms == m))[0])


def _fourier_element(func, lp, l):
    """<lp| func |l> on S^1 by adaptive quadrature; func acts on theta -> e^{i l theta}."""
    re = quad(lambda t: (np.exp(-1j * lp * t) * func(t, l)).real, 0, 2 * np.pi, limit=200)[0]
    im = quad(lambda t: (np.exp(-1j * lp * t) * func(t, l)).imag, 0, 2 * np.pi, limit=200)[0]
    return (re + 1j * im) / (2 * np.pi)


@pytest.mark.parametrize("N,lmax", [(2, 8), (2, 16), (3, 6), (3, 10)])
def test_gram_and_round_trip(N, lmax):
    b = BasisSpec(N, lmax)
    assert np.max(np.abs(b.gram() - np.eye(b.size))) < 1e-12
    rng = np.random.default_rng(0)
    c = rng.standard_normal(b.size) + 1j * rng.standard_normal(b.size)
    assert np.max(np.abs(b.analyze(b.synthesize(c)) - c)) < 1e-12


def test_grid_sizes():
    b2, b3 = BasisSpec(2, 8), BasisSpec(3, 8)
    assert b2.npoints >= 4 * 8 + 8
    assert b3.npoints >= (2 * 8 + 4) * (4 * 8 + 8)
    # Gauss-Legendre nodes never sit on a pole
    assert np.min(np.sin(b3.theta)) > 0


def test_basis_validation():
    with pytest.raises(BasisError):
        BasisSpec(4, 8)
    with pytest.raises(BasisError):
        BasisSpec(3, 3)


def test_position_circle_entries():
    b = BasisSpec(2, 8)
    x1 = build_position(b, PhysicalParams(), 1).data
    for l in range(-7, 8):
        for lp in range(-8, 9):
            oracle = _fourier_element(lambda t, l: np.cos(t) * np.exp(1j * l * t), lp, l)
            assert abs(x1[_index2(b, lp), _index2(b, l)] - oracle) < 1e-12
    assert x1[_index2(b, 4), _index2(b, 3)] == pytest.approx(0.5)


def test_momentum_circle_entries():
    b = BasisSpec(2, 8)
    p1 = build_momentum(b, PhysicalParams(), 1).data

    def p1_oracle(t, l):
        # -i(-sin t d/dt - cos t / 2) e^{ilt}
        return -1j * (-np.sin(t) * 1j * l - np.cos(t) / 2) * np.exp(1j * l * t)

    for l in range(-7, 8):
        for lp in (l - 1, l + 1):
            oracle = _fourier_element(p1_oracle, lp, l)
            assert abs(p1[_index2(b, lp), _index2(b, l)] - oracle) < 1e-12
        assert p1[_index2(b, l + 1), _index2(b, l)] == pytest.approx(1j * (2 * l + 1) / 4)
        assert p1[_index2(b, l - 1), _index2(b, l)] == pytest.approx(-1j * (2 * l - 1) / 4)


def test_position_sphere_x3_squared():
    b = BasisSpec(3, 8)
    x3 = build_position(b, PhysicalParams(), 3).data
    i00 = _index3(b, 0, 0)
    # oracle: int cos^2(theta) dOmega / 4 pi
    oracle = quad(lambda t: np.cos(t) ** 2 * np.sin(t), 0, np.pi)[0] / 2
    assert (x3 @ x3)[i00, i00] == pytest.approx(oracle, abs=1e-13)
    assert oracle == pytest.approx(1 / 3)


def test_surface_gradient_matches_finite_differences():
    b = BasisSpec(3, 6)
    G = b.surface_gradient()
    h = 1e-6
    th, ph = b.theta, b.phi
    theta_hat = np.column_stack([np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)])
    phi_hat = np.column_stack([-np.sin(ph), np.cos(ph), np.zeros_like(ph)])
    for col, (l, m) in enumerate(zip(b.levels, b.ms)):
        Y = lambda t, p: sph_harm_y(l, m, t, p)  # noqa: E731
        dt = (Y(th + h, ph) - Y(th - h, ph)) / (2 * h)
        dp = (Y(th, ph + h) - Y(th, ph - h)) / (2 * h)
        fd = dt[:, None] * theta_hat + (dp / np.sin(th))[:, None] * phi_hat
        assert np.max(np.abs(G[:, col, :] - fd)) < 1e-6


@pytest.mark.parametrize("N,lmax", [(2, 10), (3, 8)])
def test_selection_rules_and_hermiticity(N, lmax):
    ops = build_operator_set(N, lmax)
    lv = ops.basis.levels
    off = np.abs(lv[:, None] - lv[None, :]) != 1
    for A in (*ops.x, *ops.p):
        assert hermiticity_error(A) < 1e-10
        assert np.max(np.abs(A.data[off])) < 1e-12


def test_monopole_momentum_vanishes():
    ops = build_operator_set(3, 6)
    i00 = _index3(ops.basis, 0, 0)
    for p in ops.p:
        assert abs(p.data[i00, i00]) < 1e-14


def test_naive_momentum_not_hermitian():
    b = BasisSpec(3, 6)
    p = build_momentum(b, PhysicalParams(), 1, curvature_term=False)
    assert not p.hermitian
    assert hermiticity_error(p) > 0.1


@pytest.mark.parametrize("N,lmax", [(2, 8), (3, 6)])
def test_quadrature_robustness(N, lmax):
    params = PhysicalParams(radius=1.7, hbar=0.9)
    a = build_operator_set(N, lmax, params)
    b = build_operator_set(N, lmax, params, oversample=2)
    for A, B in zip((*a.x, *a.p), (*b.x, *b.p)):
        assert np.max(np.abs(A.data - B.data)) < 1e-12


@pytest.mark.parametrize("N,lmax,r", [(2, 10, 1.0), (3, 8, 2.0)])
def test_constraint_surface(N, lmax, r):
    ops = build_operator_set(N, lmax, PhysicalParams(radius=r))
    S = sum(x.data @ x.data for x in ops.x)
    m = ops.basis.levels <= lmax - 2
    assert np.max(np.abs(S[np.ix_(m, m)] - r * r * np.eye(m.sum()))) < 1e-10


def test_laplace_beltrami_and_hamiltonian_diagonals():
    b3, b2 = BasisSpec(3, 6), BasisSpec(2, 6)
    D3 = np.diag(build_laplace_beltrami(b3).data).real
    assert np.count_nonzero(D3 == -6) == 5
    assert D3[_index3(b3, 0, 0)] == 0
    D2 = np.diag(build_laplace_beltrami(b2).data).real
    assert D2[_index2(b2, 3)] == D2[_index2(b2, -3)] == -9

    one = PhysicalParams()
    H3 = np.diag(build_hamiltonian(b3, one, 0.0).data).real
    assert H3[_index3(b3, 1, 0)] == pytest.approx(1.0)
    H2 = np.diag(build_hamiltonian(b2, one, -0.25).data).real
    assert H2[_index2(b2, 0)] == pytest.approx(-1 / 8)
    assert np.diag(build_hamiltonian(b3, one, 0.0).data)[_index3(b3, 0, 0)] == 0


def test_operator_matrix_contracts():
    b = BasisSpec(2, 4)
    with pytest.raises(BasisError):
        OperatorMatrix(np.zeros((3, 3), complex), b, "bad")
    with pytest.raises(BasisError):
        OperatorMatrix(np.array(np.triu(np.ones((b.size, b.size))), complex), b, "A", hermitian=True)
    x1 = build_position(b, PhysicalParams(), 1)
    with pytest.raises(ValueError):
        x1.data[0, 0] = 1.0
    other = build_position(BasisSpec(2, 5), PhysicalParams(), 1)
    with pytest.raises(BasisError):
        x1 @ other
    with pytest.raises(BasisError):
        build_position(b, PhysicalParams(), 3)


def test_json_dump_round_trip(tmp_path):
    b = BasisSpec(3, 4)
    p2 = build_momentum(b, PhysicalParams(), 2)
    d = json.loads(p2.to_json())
    assert (d["label"], d["N"], d["l_max"]) == ("p_2", 3, 4)
    assert len(d["entries"]) == b.size ** 2
    back = operator_from_dict(d, b)
    assert np.array_equal(back.data, p2.data)
    # row-major: entry k is element (k // n, k % n)
    k = 7
    assert complex(*d["entries"][k]) == p2.data[k // b.size, k % b.size]

    p2.save(tmp_path / "p2.npz")
    z = np.load(tmp_path / "p2.npz")
    assert np.array_equal(z["entries"], p2.data)
    assert str(z["label"]) == "p_2"
