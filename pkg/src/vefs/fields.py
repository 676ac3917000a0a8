"""Conversions between component-stacked tensor fields and matrix stacks.

A 2D symmetric tensor field is stored as ``(3, N, N)`` = ``(xx, xy, yy)``;
pointwise algebra wants ``(N, N, 2, 2)``.
"""

import numpy as np

COMPONENTS = ("xx", "xy", "yy")


def to_matrix(q):
    q = np.asarray(q)
    m = np.empty(q.shape[1:] + (2, 2), dtype=q.dtype)
    m[..., 0, 0] = q[0]
    m[..., 0, 1] = q[1]
    m[..., 1, 0] = q[1]
    m[..., 1, 1] = q[2]
    return m


def from_matrix(m):
    """Component stack from a matrix stack; the off-diagonal is averaged."""
    m = np.asarray(m)
    return np.stack([m[..., 0, 0], 0.5 * (m[..., 0, 1] + m[..., 1, 0]), m[..., 1, 1]])


def square(b):
    """Components of ``b @ b`` for a symmetric component stack."""
    bxx, bxy, byy = b
    return np.stack([bxx * bxx + bxy * bxy, bxy * (bxx + byy), bxy * bxy + byy * byy])


def trace(q):
    return q[0] + q[2]


def identity(N):
    q = np.zeros((3, N, N))
    q[0] = 1.0
    q[2] = 1.0
    return q
