import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vefs import tensor_algebra as ta
from vefs.errors import DegenerateSystem, DegenerateTrace, NotPositiveDefinite, SingularSystem

from conftest import oracle_symmetrizer, random_spd

finite = st.floats(-3, 3, allow_nan=False, allow_subnormal=False)


@st.composite
def spd_and_grad(draw, dim):
    m = draw(arrays(float, (dim, dim), elements=finite))
    b = m @ m.T + (0.2 + draw(st.floats(0, 2))) * np.eye(dim)
    g = draw(arrays(float, (dim, dim), elements=finite))
    return b, g


# storage

def test_upper_storage_round_trip(rng):
    for d in (2, 3):
        m = random_spd(rng, 5, d)
        back = ta.sym_from_upper(ta.sym_to_upper(m), d)
        assert np.array_equal(back, m)
        assert np.array_equal(back, np.swapaxes(back, -1, -2))


def test_anti_matrix_is_antisymmetric(rng):
    a = rng.standard_normal((4, 3))
    m = ta.anti_matrix(a, 3)
    assert np.array_equal(m, -np.swapaxes(m, -1, -2))
    assert m[0, 0, 1] == a[0, 0] and m[0, 0, 2] == a[0, 1] and m[0, 1, 2] == a[0, 2]


# eigen-decomposition

def test_eig_diagonal():
    lam, p = ta.eig_sym(np.diag([4.0, 9.0]))
    assert np.allclose(lam, [4, 9]) and np.allclose(np.abs(p), np.eye(2))


def test_eig_identity_3d():
    lam, _ = ta.eig_sym(np.eye(3))
    assert np.allclose(lam, 1.0)


@pytest.mark.parametrize("dim", [2, 3])
def test_eig_reconstruction(rng, dim):
    m = rng.standard_normal((200, dim, dim))
    m = m + np.swapaxes(m, -1, -2)
    lam, p = ta.eig_sym(m)
    rebuilt = np.swapaxes(p, -1, -2) @ (lam[..., :, None] * p)
    assert np.max(np.abs(rebuilt - m)) <= 1e-13 * max(1, np.abs(m).max())
    assert np.allclose(p @ np.swapaxes(p, -1, -2), np.eye(dim), atol=1e-13)
    assert np.all(np.diff(lam, axis=-1) >= 0)
    assert np.allclose(lam, np.linalg.eigvalsh(m), atol=1e-13)


# square root

def test_sqrt_simple():
    assert np.allclose(ta.sqrt_sym(np.eye(2)), np.eye(2))
    assert np.allclose(ta.sqrt_sym(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    assert np.allclose(ta.sqrt_sym(np.diag([4.0, 9.0, 16.0])), np.diag([2.0, 3.0, 4.0]))


@pytest.mark.parametrize("dim", [2, 3])
def test_sqrt_matches_scipy(rng, dim):
    m = rng.standard_normal((50, dim, dim))
    c = np.swapaxes(m, -1, -2) @ m + np.eye(dim)
    b = ta.sqrt_sym(c)
    for ci, bi in zip(c, b):
        assert np.allclose(bi, scipy.linalg.sqrtm(ci).real, rtol=1e-11, atol=1e-12)
    assert np.max(np.abs(b @ b - c) / np.abs(c).max(axis=(-2, -1))[:, None, None]) <= 1e-12
    assert np.all(ta.is_spd(b))


def test_sqrt_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        ta.sqrt_sym(np.diag([1.0, -1.0]))
    with pytest.raises(NotPositiveDefinite):
        ta.sqrt_sym(np.diag([1.0, 2.0, 0.0]))


@pytest.mark.parametrize("dim", [2, 3])
@given(data=st.data())
def test_sqrt_of_square_round_trip(dim, data):
    b, _ = data.draw(spd_and_grad(dim))
    assert np.allclose(ta.sqrt_sym(b @ b), b, rtol=1e-12, atol=1e-12 * np.abs(b).max())


def test_inverse_and_det(rng):
    for d in (2, 3):
        m = random_spd(rng, 20, d, shift=1.0)
        assert np.allclose(ta.inv_sym(m), np.linalg.inv(m), rtol=1e-12)
        assert np.allclose(ta.det_sym(m), np.linalg.det(m), rtol=1e-12)
    with pytest.raises(NotPositiveDefinite):
        ta.inv_sym(np.zeros((2, 2)))


# 2D symmetrizer

def test_antisym_2d_zero_gradient():
    assert ta.solve_antisym_2d(np.eye(2), np.zeros((2, 2)))[0] == 0.0


def test_antisym_2d_identity_b(rng):
    g = rng.standard_normal((2, 2))
    a = ta.solve_antisym_2d(np.eye(2), g)
    # with b = I the defect r - r^T is g - g^T + 2a, so a12 = (g10 - g01) / 2
    assert np.isclose(a[0], 0.5 * (g[1, 0] - g[0, 1]))
    assert ta.symmetry_residual(np.eye(2), g, a) <= 1e-15


@pytest.mark.parametrize("entry", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_antisym_2d_single_entry_against_oracle(entry):
    b = np.diag([2.0, 1.0])
    g = np.zeros((2, 2))
    g[entry] = 1.3
    a = ta.solve_antisym_2d(b, g)
    assert np.isclose(a[0], oracle_symmetrizer(b, g)[0], rtol=1e-14, atol=1e-15)


@given(data=st.data())
def test_antisym_2d_symmetrizes(data):
    b, g = data.draw(spd_and_grad(2))
    a = ta.solve_antisym_2d(b, g)
    assert ta.symmetry_residual(b, g, a) <= 1e-13
    assert np.isclose(a[0], oracle_symmetrizer(b, g)[0], rtol=1e-10, atol=1e-12)


def test_antisym_2d_degenerate_trace():
    with pytest.raises(DegenerateTrace):
        ta.solve_antisym_2d(np.diag([1.0, -1.0]), np.ones((2, 2)))


# 3D symmetrizer

def test_antisym_3d_identity(rng):
    g = rng.standard_normal((3, 3))
    a = ta.solve_antisym_3d(np.eye(3), g)
    a_ls = ta.solve_antisym_3d_linsolve(np.eye(3), g)
    assert np.allclose(a, a_ls, rtol=1e-14)
    # b = I reduces the system to 2a = w, with w the antisymmetric defect of g
    w = np.array([g[1, 0] - g[0, 1], g[2, 0] - g[0, 2], g[2, 1] - g[1, 2]])
    assert np.allclose(a, w / 2, rtol=1e-14)


def test_antisym_3d_diagonal_b(rng):
    lam = np.array([0.5, 2.0, 3.5])
    b = np.diag(lam)
    g = rng.standard_normal((3, 3))
    a = ta.solve_antisym_3d(b, g)
    oracle = oracle_symmetrizer(b, g)
    assert np.allclose(a, oracle, rtol=1e-13)
    assert np.allclose(ta.solve_antisym_3d_linsolve(b, g), oracle, rtol=1e-13)
    # for diagonal b the system decouples: (l_i + l_j) a_ij = -(b g - g^T b)_ij
    d = b @ g - g.T @ b
    expect = [-d[i, j] / (lam[i] + lam[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
    assert np.allclose(a, expect, rtol=1e-13)


def test_antisym_3d_zero_gradient(rng):
    b = random_spd(rng, 1, 3)[0]
    assert np.array_equal(ta.solve_antisym_3d_linsolve(b, np.zeros((3, 3))), np.zeros(3))
    assert np.allclose(ta.solve_antisym_3d(b, np.zeros((3, 3))), 0.0)


@given(data=st.data())
def test_antisym_3d_paths_agree_with_oracle(data):
    b, g = data.draw(spd_and_grad(3))
    a = ta.solve_antisym_3d(b, g)
    a_ls = ta.solve_antisym_3d_linsolve(b, g)
    oracle = oracle_symmetrizer(b, g)
    # a vanishes when b g is already symmetric; fall back to the size of g
    scale = np.linalg.norm(oracle) + np.linalg.norm(g)
    assert np.linalg.norm(a - a_ls) <= 1e-12 * scale
    assert np.linalg.norm(a - oracle) <= 1e-10 * scale
    assert ta.symmetry_residual(b, g, a) <= 1e-12


@pytest.mark.parametrize("dim", [2, 3])
def test_symmetrizer_sweep(rng, dim):
    b = random_spd(rng, 10_000, dim)
    g = rng.standard_normal((10_000, dim, dim))
    a = ta.solve_antisym(b, g)
    assert np.max(ta.symmetry_residual(b, g, a)) <= 1e-12
    if dim == 3:
        a_ls = ta.solve_antisym_3d_linsolve(b, g)
        rel = np.linalg.norm(a - a_ls, axis=-1) / np.linalg.norm(a_ls, axis=-1)
        assert rel.max() <= 1e-12


def test_antisym_3d_degenerate():
    b = np.diag([1.0, -1.0, 0.5])  # lambda1 + lambda2 = 0
    with pytest.raises(DegenerateSystem):
        ta.solve_antisym_3d(b, np.ones((3, 3)))
    with pytest.raises(SingularSystem):
        ta.solve_antisym_3d_linsolve(b, np.ones((3, 3)))


@pytest.mark.parametrize("dim", [2, 3])
@given(data=st.data(), alpha=st.floats(-5, 5), beta=st.floats(0.01, 100))
def test_symmetrizer_homogeneity(dim, data, alpha, beta):
    b, g = data.draw(spd_and_grad(dim))
    a = ta.solve_antisym(b, g)
    assert np.allclose(ta.solve_antisym(b, alpha * g), alpha * a, rtol=1e-12, atol=1e-12)
    assert np.allclose(ta.solve_antisym(beta * b, g), a, rtol=1e-11, atol=1e-12)


# residual

def test_symmetry_residual_cases(rng):
    s = rng.standard_normal((2, 2))
    assert ta.symmetry_residual(np.eye(2), s + s.T, np.zeros(1)) == 0.0
    anti = np.array([[0.0, 1.0], [-1.0, 0.0]])
    assert ta.symmetry_residual(np.eye(2), anti, np.zeros(1)) > 0
    assert ta.symmetry_residual(np.eye(3), np.zeros((3, 3)), np.zeros(3)) == 0.0
