"""Periodic pseudo-spectral operators on ``[-pi, pi)^2``.

Fields are plain arrays whose last two axes are the grid: a scalar is
``(N, N)``, a vector ``(2, N, N)`` and a symmetric tensor ``(3, N, N)``
holding the ``xx, xy, yy`` components. Axis ``-2`` is ``x`` and axis ``-1``
is ``y`` (``indexing="ij"``).

The spectral representation is the real-to-complex transform along ``y``,
``(..., N, N // 2 + 1)``, normalized so that the zero mode equals the field
mean.
"""

import functools
import os
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import SizeMismatch

try:  # FFTW is about twice as fast for the complex-to-real direction
    import pyfftw
    import pyfftw.interfaces.scipy_fft as _fftw
except ImportError:  # pragma: no cover - exercised only without pyfftw
    _fftw = None
else:
    pyfftw.config.PLANNER_EFFORT = "FFTW_ESTIMATE"  # timing-free, reproducible plans
    pyfftw.config.NUM_THREADS = 1
    pyfftw.interfaces.cache.enable()


def fft_backend():
    """``"fftw"`` or ``"scipy"``; ``VEFS_FFT=scipy`` forces the latter."""
    if _fftw is not None and os.environ.get("VEFS_FFT", "fftw") != "scipy":
        return "fftw"
    return "scipy"


def _rfft2(f):
    if fft_backend() == "fftw":
        return _fftw.rfft2(f, axes=(-2, -1), norm="forward")
    return scipy.fft.rfft2(f, axes=(-2, -1), norm="forward")


def _irfft2(fh, N):
    if fft_backend() == "fftw":
        return _fftw.irfft2(fh, s=(N, N), axes=(-2, -1), norm="forward")
    return scipy.fft.irfft2(fh, s=(N, N), axes=(-2, -1), norm="forward")

FILTER_ALPHA = 36.0
FILTER_ORDER = 36


def rho(theta):
    """Smooth exponential filter profile ``exp(-36 theta^36)``."""
    return np.exp(-FILTER_ALPHA * np.asarray(theta, dtype=float) ** FILTER_ORDER)


@dataclass(frozen=True, eq=False)
class Grid:
    N: int
    x: np.ndarray
    kx: np.ndarray
    ky: np.ndarray
    k2: np.ndarray
    inv_k2: np.ndarray
    filter: np.ndarray
    ikx: np.ndarray
    iky: np.ndarray

    @property
    def h(self):
        return 2 * np.pi / self.N

    @property
    def spectral_shape(self):
        return (self.N, self.N // 2 + 1)

    def mesh(self):
        return np.meshgrid(self.x, self.x, indexing="ij")


@functools.lru_cache(maxsize=None)
def make_grid(N):
    """Grid of ``N x N`` points with spacing ``2 pi / N`` starting at ``-pi``."""
    if N <= 0 or N % 2:
        raise ValueError(f"N must be a positive even integer, got {N}")
    x = -np.pi + 2 * np.pi * np.arange(N) / N
    kx = np.fft.fftfreq(N, 1.0 / N)[:, None]
    ky = np.fft.rfftfreq(N, 1.0 / N)[None, :]
    k2 = kx ** 2 + ky ** 2
    inv_k2 = np.zeros_like(k2)
    inv_k2[k2 > 0] = 1.0 / k2[k2 > 0]
    filt = rho(2 * np.abs(kx) / N) * rho(2 * np.abs(ky) / N)
    # derivative multipliers with the Nyquist mode removed
    ikx = 1j * np.where(np.abs(kx) == N // 2, 0.0, kx)
    iky = 1j * np.where(ky == N // 2, 0.0, ky)
    for a in (x, kx, ky, k2, inv_k2, filt, ikx, iky):
        a.setflags(write=False)
    return Grid(N, x, kx, ky, k2, inv_k2, filt, ikx, iky)


def _grid_for(f, spectral=False):
    shape = np.shape(f)[-2:]
    if len(shape) < 2:
        raise SizeMismatch(f"field needs two grid axes, got shape {np.shape(f)}")
    N = shape[0]
    expected = (N, N // 2 + 1) if spectral else (N, N)
    if shape != expected:
        raise SizeMismatch(f"grid axes {shape} do not match {expected}")
    return make_grid(N)


def _check(f, grid, spectral):
    expected = grid.spectral_shape if spectral else (grid.N, grid.N)
    if np.shape(f)[-2:] != expected:
        raise SizeMismatch(f"grid axes {np.shape(f)[-2:]} do not match {expected}")


def forward(f, grid=None):
    """Physical -> spectral; zero mode equals the mean."""
    if grid is None:
        grid = _grid_for(f)
    _check(f, grid, False)
    return _rfft2(f)


def inverse(fh, grid=None):
    """Spectral -> physical (real)."""
    if grid is None:
        grid = _grid_for(fh, spectral=True)
    _check(fh, grid, True)
    return _irfft2(fh, grid.N)


def parseval_weights(grid):
    """Multiplicity of each stored half-spectrum column in the full spectrum."""
    w = np.full(grid.spectral_shape, 2.0)
    w[:, 0] = 1.0
    w[:, -1] = 1.0
    return w


def mean_square(fh, grid):
    """Grid mean of ``f**2`` computed from the half spectrum."""
    return np.sum(parseval_weights(grid) * np.abs(fh) ** 2, axis=(-2, -1))


def deriv(fh, axis, grid):
    """Spectral derivative along ``axis`` (0 = x, 1 = y); Nyquist mode zeroed."""
    if axis in (0, "x"):
        return grid.ikx * fh
    if axis in (1, "y"):
        return grid.iky * fh
    raise ValueError(f"axis must be 0/'x' or 1/'y', got {axis!r}")


def smooth_filter(fh, grid):
    return fh * grid.filter


def divergence(vh, grid):
    return grid.ikx * vh[0] + grid.iky * vh[1]


def curl(vh, grid):
    """Scalar vorticity ``d_x v_y - d_y v_x`` (spectral)."""
    return grid.ikx * vh[1] - grid.iky * vh[0]


def tensor_divergence(th, grid):
    """Divergence of a symmetric tensor stored as ``(xx, xy, yy)``."""
    return np.stack([grid.ikx * th[0] + grid.iky * th[1],
                     grid.ikx * th[1] + grid.iky * th[2]])


def stokes_solve(rhs_h, grid):
    """Solve ``-lap u + grad p = rhs``, ``div u = 0`` in Fourier space.

    ``u_k = (I - k k^T / |k|^2) rhs_k / |k|^2`` and the mean mode is zero.
    """
    _check(rhs_h, grid, True)
    kx, ky = grid.kx, grid.ky
    kdotr = (kx * rhs_h[0] + ky * rhs_h[1]) * grid.inv_k2
    ux = (rhs_h[0] - kx * kdotr) * grid.inv_k2
    uy = (rhs_h[1] - ky * kdotr) * grid.inv_k2
    return np.stack([ux, uy])


def gradient_physical(vh, grid):
    """Velocity gradient ``g[..., i, j] = d_i v_j`` in physical space."""
    d = inverse(np.stack([grid.ikx * vh[0], grid.ikx * vh[1],
                          grid.iky * vh[0], grid.iky * vh[1]]), grid)
    g = np.empty((grid.N, grid.N, 2, 2))
    g[..., 0, 0], g[..., 0, 1], g[..., 1, 0], g[..., 1, 1] = d
    return g


def advect_physical(fh, uh, grid, u=None):
    """``u . grad f`` in physical space from filtered factors.

    ``fh`` may carry leading component axes. ``u`` is the already-filtered
    physical velocity when the caller has it at hand.
    """
    ff = smooth_filter(fh, grid)
    if u is None:
        u = inverse(smooth_filter(uh, grid), grid)
    d = inverse(np.stack([grid.ikx * ff, grid.iky * ff]), grid)
    return u[0] * d[0] + u[1] * d[1]


def advect(fh, uh, grid):
    """Spectral ``u . grad f`` with the filter applied to every factor."""
    _check(fh, grid, True)
    _check(uh, grid, True)
    return forward(advect_physical(fh, uh, grid), grid)


def _fold_matrix(N, Nc):
    """0/1 matrix mapping fine-grid mode indices onto coarse-grid indices."""
    k = np.fft.fftfreq(N, 1.0 / N).astype(int)
    keep = np.flatnonzero(np.abs(k) <= Nc // 2)
    P = np.zeros((Nc, N))
    P[np.mod(k[keep], Nc), keep] = 1.0
    return P


def restrict(f, n_coarse):
    """Spectral truncation of a physical field to an ``n_coarse`` grid.

    Modes with ``|kx|, |ky| <= n_coarse / 2`` are kept; the two fine-grid
    modes ``+-n_coarse/2`` fold onto the coarse Nyquist mode, so the result
    equals the truncated series sampled at the coarse points.
    """
    f = np.asarray(f, dtype=float)
    N = f.shape[-1]
    if f.shape[-2] != N:
        raise SizeMismatch(f"expected square grid, got {f.shape[-2:]}")
    if n_coarse <= 0 or n_coarse % 2 or N % n_coarse:
        raise SizeMismatch(f"coarse size {n_coarse} must be even and divide {N}")
    if n_coarse == N:
        return f.copy()
    F = scipy.fft.fft2(f, axes=(-2, -1), norm="forward")
    P = _fold_matrix(N, n_coarse)
    G = P @ F @ P.T
    return scipy.fft.ifft2(G, axes=(-2, -1), norm="forward").real
