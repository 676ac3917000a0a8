"""Pointwise algebra for small symmetric matrices.

Every function works on stacks of matrices: a symmetric matrix is a numpy
array of shape ``(..., d, d)`` with ``d`` in ``{2, 3}``, and all leading axes
are treated as independent points. A velocity gradient ``g`` uses the
convention ``g[..., i, j] = du_j/dx_i``.

Antisymmetric matrices are carried by their strict upper triangle:
``(..., 1)`` holding ``a12`` in 2D and ``(..., 3)`` holding
``(a12, a13, a23)`` in 3D.
"""

import numpy as np

from .errors import (
    DegenerateSystem,
    DegenerateTrace,
    NotPositiveDefinite,
    SingularSystem,
)

EPS_TRACE = 1e-14
EPS_DET = 1e-14

_UPPER = {2: ((0, 0), (0, 1), (1, 1)),
          3: ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))}


def _dim(m):
    m = np.asarray(m)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2] or m.shape[-1] not in (2, 3):
        raise ValueError(f"expected (..., d, d) with d in (2, 3), got {m.shape}")
    return m.shape[-1]


def sym_to_upper(m):
    """Upper-triangle storage ``(..., d(d+1)/2)`` of a symmetric stack."""
    m = np.asarray(m)
    d = _dim(m)
    return np.stack([m[..., i, j] for i, j in _UPPER[d]], axis=-1)


def sym_from_upper(v, dim=None):
    """Rebuild an exactly symmetric stack from upper-triangle storage."""
    v = np.asarray(v)
    if dim is None:
        dim = {3: 2, 6: 3}[v.shape[-1]]
    m = np.empty(v.shape[:-1] + (dim, dim), dtype=v.dtype)
    for k, (i, j) in enumerate(_UPPER[dim]):
        m[..., i, j] = v[..., k]
        m[..., j, i] = v[..., k]
    return m


def anti_matrix(a, dim):
    """Full antisymmetric matrix from strict-upper entries."""
    a = np.asarray(a)
    m = np.zeros(a.shape[:-1] + (dim, dim), dtype=a.dtype)
    pairs = ((0, 1),) if dim == 2 else ((0, 1), (0, 2), (1, 2))
    for k, (i, j) in enumerate(pairs):
        m[..., i, j] = a[..., k]
        m[..., j, i] = -a[..., k]
    return m


def symmetrize(m):
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def trace(m):
    return np.trace(m, axis1=-2, axis2=-1)


def eigvals_sym2(a, b, c):
    """Ascending eigenvalues of ``[[a, b], [b, c]]`` given componentwise."""
    mid = 0.5 * (a + c)
    rad = np.hypot(0.5 * (a - c), b)
    return mid - rad, mid + rad


def eig_sym(m):
    """Eigen-decomposition ``m = p.T @ diag(lam) @ p`` with ``lam`` ascending.

    Rows of ``p`` are the eigenvectors. 2x2 uses the closed-form rotation
    angle; 3x3 defers to LAPACK's symmetric solver.
    """
    m = np.asarray(m, dtype=float)
    d = _dim(m)
    if d == 2:
        a, b, c = m[..., 0, 0], m[..., 0, 1], m[..., 1, 1]
        lo, hi = eigvals_sym2(a, b, c)
        phi = 0.5 * np.arctan2(-2.0 * b, c - a)
        cs, sn = np.cos(phi), np.sin(phi)
        p = np.empty(m.shape)
        p[..., 0, 0], p[..., 0, 1] = cs, sn
        p[..., 1, 0], p[..., 1, 1] = -sn, cs
        return np.stack([lo, hi], axis=-1), p
    lam, vecs = np.linalg.eigh(symmetrize(m))
    return lam, np.swapaxes(vecs, -1, -2)


def min_eig(m):
    m = np.asarray(m, dtype=float)
    if _dim(m) == 2:
        return eigvals_sym2(m[..., 0, 0], m[..., 0, 1], m[..., 1, 1])[0]
    return np.linalg.eigvalsh(symmetrize(m))[..., 0]


def is_spd(m):
    return min_eig(m) > 0


def sqrt_sym(c):
    """Principal square root of a stack of SPD matrices.

    Raises NotPositiveDefinite if any matrix has a non-positive eigenvalue.
    """
    c = np.asarray(c, dtype=float)
    d = _dim(c)
    lam_min = min_eig(c)
    if not np.all(lam_min > 0):
        raise NotPositiveDefinite(
            f"square root needs SPD input; min eigenvalue {np.min(lam_min):.3e}")
    if d == 2:
        # Cayley-Hamilton: (c + sI)^2 = (tr c + 2s) c when s^2 = det c.
        s = np.sqrt(c[..., 0, 0] * c[..., 1, 1] - c[..., 0, 1] ** 2)
        t = np.sqrt(c[..., 0, 0] + c[..., 1, 1] + 2.0 * s)
        b = c + s[..., None, None] * np.eye(2)
        b = b / t[..., None, None]
        return symmetrize(b)
    lam, p = eig_sym(c)
    b = np.swapaxes(p, -1, -2) @ (np.sqrt(lam)[..., :, None] * p)
    return symmetrize(b)


def det_sym(m):
    m = np.asarray(m)
    if _dim(m) == 2:
        return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    return (m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
            - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
            + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0]))


def inv_sym(m, eps=EPS_DET):
    """Inverse of a symmetric stack via adjugate over determinant."""
    m = np.asarray(m, dtype=float)
    d = _dim(m)
    det = det_sym(m)
    if not np.all(np.abs(det) > eps):
        raise NotPositiveDefinite(
            f"matrix inverse with |det| <= {eps:g} (min |det| {np.min(np.abs(det)):.3e})")
    adj = np.empty(m.shape)
    if d == 2:
        adj[..., 0, 0] = m[..., 1, 1]
        adj[..., 1, 1] = m[..., 0, 0]
        adj[..., 0, 1] = -m[..., 0, 1]
        adj[..., 1, 0] = -m[..., 1, 0]
    else:
        for i in range(3):
            for j in range(3):
                r = [k for k in range(3) if k != j]
                s = [k for k in range(3) if k != i]
                minor = (m[..., r[0], s[0]] * m[..., r[1], s[1]]
                         - m[..., r[0], s[1]] * m[..., r[1], s[0]])
                adj[..., i, j] = (-1) ** (i + j) * minor
    return adj / det[..., None, None]


def solve_antisym_2d(b, g, eps=EPS_TRACE):
    """Antisymmetric ``a`` making ``b @ g + a @ b`` symmetric, n = 2.

    Returns ``a12`` with shape ``(..., 1)``.
    """
    b = np.asarray(b, dtype=float)
    g = np.asarray(g, dtype=float)
    tr = b[..., 0, 0] + b[..., 1, 1]
    if not np.all(tr > eps):
        raise DegenerateTrace(f"b11 + b22 <= {eps:g} (min {np.min(tr):.3e})")
    # u_{a,b} = du_a/dx_b = g[b, a]
    num = (b[..., 0, 1] * g[..., 0, 0] - b[..., 0, 0] * g[..., 0, 1]
           + b[..., 1, 1] * g[..., 1, 0] - b[..., 1, 0] * g[..., 1, 1])
    return (num / tr)[..., None]


def _w3(b, g):
    def u(i, j):
        return g[..., j - 1, i - 1]

    def bb(i, j):
        return b[..., i - 1, j - 1]

    w1 = ((bb(1, 2) * u(1, 1) - bb(1, 1) * u(2, 1))
          + (bb(2, 2) * u(1, 2) - bb(2, 1) * u(2, 2))
          + (bb(3, 2) * u(1, 3) - bb(3, 1) * u(2, 3)))
    w2 = ((bb(1, 3) * u(1, 1) - bb(1, 1) * u(3, 1))
          + (bb(3, 3) * u(1, 3) - bb(3, 1) * u(3, 3))
          + (bb(2, 3) * u(1, 2) - bb(2, 1) * u(3, 2)))
    w3 = ((bb(1, 3) * u(2, 1) - bb(1, 2) * u(3, 1))
          + (bb(2, 3) * u(2, 2) - bb(2, 2) * u(3, 2))
          + (bb(3, 3) * u(2, 3) - bb(3, 2) * u(3, 3)))
    return w1, w2, w3


def solve_antisym_3d(b, g, eps=EPS_DET):
    """Closed-form symmetrizer for n = 3 (cofactor solution of the 3x3 system).

    Returns ``(a12, a13, a23)`` with shape ``(..., 3)``.
    """
    b = np.asarray(b, dtype=float)
    g = np.asarray(g, dtype=float)
    w1, w2, w3 = _w3(b, g)
    t1 = b[..., 1, 1] + b[..., 2, 2]
    t2 = b[..., 0, 0] + b[..., 2, 2]
    t3 = b[..., 0, 0] + b[..., 1, 1]
    b3, b2, b1 = b[..., 0, 1], b[..., 0, 2], b[..., 1, 2]
    k12 = b1 * t1 + b3 * b2
    k13 = b2 * t2 + b1 * b3
    k23 = b2 * b1 + b3 * t3
    det = t1 * (t2 * t3 - b1 ** 2) - b2 * k13 - b3 * k23
    if not np.all(det > eps):
        raise DegenerateSystem(
            f"det(tr(b) I - b) <= {eps:g} (min {np.min(det):.3e})")
    a12 = (t1 * t2 - b3 ** 2) * w1 - k12 * w2 + k13 * w3
    a13 = -k12 * w1 + (t1 * t3 - b2 ** 2) * w2 - k23 * w3
    a23 = k13 * w1 - k23 * w2 + (t2 * t3 - b1 ** 2) * w3
    return np.stack([a12, a13, a23], axis=-1) / det[..., None]


def _gepp_solve(m, rhs, rtol):
    """Batched Gaussian elimination with partial pivoting on (..., n, n)."""
    m = np.array(m, dtype=float)
    x = np.array(rhs, dtype=float)
    n = m.shape[-1]
    scale = np.max(np.abs(m), axis=(-2, -1))
    m = m.reshape(-1, n, n)
    x = x.reshape(-1, n)
    scale = np.reshape(scale, -1)
    idx = np.arange(m.shape[0])
    for k in range(n):
        piv = k + np.argmax(np.abs(m[:, k:, k]), axis=1)
        if not np.all(np.abs(m[idx, piv, k]) > rtol * scale):
            raise SingularSystem(f"pivot below {rtol:g} * scale in column {k}")
        mk, mp = m[idx, k].copy(), m[idx, piv].copy()
        m[idx, k], m[idx, piv] = mp, mk
        xk, xp = x[idx, k].copy(), x[idx, piv].copy()
        x[idx, k], x[idx, piv] = xp, xk
        for i in range(k + 1, n):
            f = m[:, i, k] / m[:, k, k]
            m[:, i, k:] -= f[:, None] * m[:, k, k:]
            x[:, i] -= f * x[:, k]
    for k in range(n - 1, -1, -1):
        x[:, k] = (x[:, k] - np.einsum("bj,bj->b", m[:, k, k + 1:], x[:, k + 1:])) / m[:, k, k]
    return x


def solve_antisym_3d_linsolve(b, g, rtol=1e-14):
    """Symmetrizer for n = 3 by a generic pivoted solve of the 3x3 system.

    Independent of :func:`solve_antisym_3d`; used to cross-check it.
    """
    b = np.asarray(b, dtype=float)
    g = np.asarray(g, dtype=float)
    w1, w2, w3 = _w3(b, g)
    m = np.empty(b.shape)
    m[..., 0, 0] = b[..., 0, 0] + b[..., 1, 1]
    m[..., 0, 1] = b[..., 1, 2]
    m[..., 0, 2] = -b[..., 2, 0]
    m[..., 1, 0] = b[..., 1, 2]
    m[..., 1, 1] = b[..., 0, 0] + b[..., 2, 2]
    m[..., 1, 2] = b[..., 0, 1]
    m[..., 2, 0] = -b[..., 0, 2]
    m[..., 2, 1] = b[..., 0, 1]
    m[..., 2, 2] = b[..., 1, 1] + b[..., 2, 2]
    rhs = np.stack([w1, w2, w3], axis=-1)
    x = _gepp_solve(m, rhs, rtol)
    return x.reshape(b.shape[:-2] + (3,))


def solve_antisym(b, g):
    """Dimension dispatch: 2D closed form or 3D closed form."""
    if _dim(b) == 2:
        return solve_antisym_2d(b, g)
    return solve_antisym_3d(b, g)


def symmetry_residual(b, g, a):
    """Relative asymmetry ``|r - r^T| / max(|b| |g|, eps)`` of ``r = b g + a b``."""
    b = np.asarray(b, dtype=float)
    g = np.asarray(g, dtype=float)
    d = _dim(b)
    r = b @ g + anti_matrix(a, d) @ b
    defect = np.linalg.norm(r - np.swapaxes(r, -1, -2), axis=(-2, -1))
    scale = np.linalg.norm(b, axis=(-2, -1)) * np.linalg.norm(g, axis=(-2, -1))
    return defect / np.maximum(scale, np.finfo(float).tiny)
