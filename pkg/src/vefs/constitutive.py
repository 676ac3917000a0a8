"""Pointwise constitutive right-hand sides for Oldroyd-B and FENE-P.

Two formulations of the same dynamics are provided: the conformation tensor
``c`` itself, and its symmetric square root ``b`` with ``b @ b = c``. Both
act on stacks of matrices ``(..., d, d)`` (see :mod:`vefs.tensor_algebra`).

The polymer stress in the Stokes limit is ``tau = -s * relaxation(c)``.
With inertia retained the prefactor becomes ``s / Re``; only the Stokes form
is used by the solver.
"""

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import tensor_algebra as ta
from .errors import CutoffExceeded, DegenerateTrace, NotPositiveDefinite


class ModelKind(str, enum.Enum):
    OLDROYD_B = "oldroyd_b"
    FENE_P = "fene_p"


class Formulation(str, enum.Enum):
    """Which tensor is time-stepped: ``c`` directly or its square root ``b``."""

    DIRECT_C = "direct_c"
    SQRT_B = "sqrt_b"


@dataclass(frozen=True)
class ModelParams:
    """Model kind, Weissenberg number ``Wi``, coupling ``s`` and FENE-P ``l2``."""

    kind: ModelKind = ModelKind.OLDROYD_B
    Wi: float = 1.0
    s: float = 0.5
    l2: float = 100.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if not self.Wi > 0:
            raise ValueError(f"Wi must be positive, got {self.Wi}")
        if not self.s >= 0:
            raise ValueError(f"s must be non-negative, got {self.s}")
        if not self.l2 > 0:
            raise ValueError(f"l2 must be positive, got {self.l2}")


def _where(bad):
    """Index of the first flagged entry (None for scalars)."""
    return np.unravel_index(np.argmax(bad), np.shape(bad)) if np.ndim(bad) else None


def _check_cutoff(tr, p, dim):
    if p.l2 <= dim:
        raise ValueError(f"l2 = {p.l2} must exceed the dimension {dim}")
    bad = ~(tr < p.l2)
    if np.any(bad):
        raise CutoffExceeded(f"tr c >= l2 = {p.l2:g} (max tr c {np.nanmax(tr):.6g})",
                             location=_where(bad))


def peterlin(tr, p):
    """FENE-P factor ``1 / (1 - tr c / l2)``."""
    return 1.0 / (1.0 - tr / p.l2)


def relax_oldroyd_b(c, p):
    c = np.asarray(c, dtype=float)
    return (np.eye(c.shape[-1]) - c) / p.Wi


def relax_fene_p(c, p):
    c = np.asarray(c, dtype=float)
    d = c.shape[-1]
    tr = ta.trace(c)
    _check_cutoff(tr, p, d)
    return (np.eye(d) - c * peterlin(tr, p)[..., None, None]) / p.Wi


def relaxation(c, p):
    """Relaxation tensor ``s(c)`` for whichever model ``p`` names."""
    if p.kind is ModelKind.OLDROYD_B:
        return relax_oldroyd_b(c, p)
    return relax_fene_p(c, p)


def polymer_stress(c, p):
    """Stokes-limit polymer stress ``-s * s(c)``."""
    return -p.s * relaxation(c, p)


def rhs_c(c, g, p):
    """Non-advective tendency ``c g + g^T c + s(c)`` of the conformation tensor."""
    c = np.asarray(c, dtype=float)
    g = np.asarray(g, dtype=float)
    cg = c @ g
    return cg + np.swapaxes(cg, -1, -2) + relaxation(c, p)


def rhs_b(b, g, p):
    """Non-advective tendency of the symmetric square root ``b``.

    ``b g + a b + (b^-1 - b * f) / (2 Wi)`` with the symmetrizing ``a`` and
    ``f = 1`` (Oldroyd-B) or the Peterlin factor in ``|b|^2 = tr(b b)``
    (FENE-P).
    """
    b = np.asarray(b, dtype=float)
    g = np.asarray(g, dtype=float)
    d = b.shape[-1]
    a = ta.anti_matrix(ta.solve_antisym(b, g), d)
    binv = ta.inv_sym(b)
    out = b @ g + a @ b
    if p.kind is ModelKind.OLDROYD_B:
        relax = binv - b
    else:
        norm2 = np.sum(b * b, axis=(-2, -1))
        _check_cutoff(norm2, p, d)
        relax = binv - b * peterlin(norm2, p)[..., None, None]
    return out + relax / (2.0 * p.Wi)


# Component kernels for 2D fields.  Tensors are ``(xx, xy, yy)`` stacks and
# the velocity gradient is the tuple ``(g00, g01, g10, g11)`` with
# ``g_ij = d_i u_j``; these are what the grid solver calls.

def relaxation_2d(q, p):
    """``s(c)`` for a component stack ``q = (cxx, cxy, cyy)``."""
    cxx, cxy, cyy = q
    if p.kind is ModelKind.OLDROYD_B:
        f = 1.0
    else:
        tr = cxx + cyy
        _check_cutoff(tr, p, 2)
        f = peterlin(tr, p)
    return np.stack([1.0 - f * cxx, -f * cxy, 1.0 - f * cyy]) / p.Wi


def rhs_c_2d(q, g, p):
    """Component form of :func:`rhs_c`."""
    cxx, cxy, cyy = q
    g00, g01, g10, g11 = g
    s = relaxation_2d(q, p)
    s[0] += 2.0 * (cxx * g00 + cxy * g10)
    s[1] += cxx * g01 + cxy * g11 + cxy * g00 + cyy * g10
    s[2] += 2.0 * (cxy * g01 + cyy * g11)
    return s


def rhs_b_2d(q, g, p, eps_trace=ta.EPS_TRACE, eps_det=ta.EPS_DET):
    """Component form of :func:`rhs_b`."""
    bxx, bxy, byy = q
    g00, g01, g10, g11 = g
    tr = bxx + byy
    if not np.all(tr > eps_trace):
        exc = DegenerateTrace(f"b11 + b22 <= {eps_trace:g} (min {np.min(tr):.3e})")
        exc.location = _where(~(tr > eps_trace))
        raise exc
    det = bxx * byy - bxy * bxy
    if not np.all(np.abs(det) > eps_det):
        exc = NotPositiveDefinite(f"|det b| <= {eps_det:g} (min {np.min(np.abs(det)):.3e})")
        exc.location = _where(~(np.abs(det) > eps_det))
        raise exc
    a12 = (bxy * g00 - bxx * g01 + byy * g10 - bxy * g11) / tr
    if p.kind is ModelKind.OLDROYD_B:
        f = 1.0
    else:
        norm2 = bxx * bxx + 2.0 * bxy * bxy + byy * byy
        _check_cutoff(norm2, p, 2)
        f = peterlin(norm2, p)
    k = 0.5 / p.Wi
    out = np.empty((3,) + np.shape(bxx))
    out[0] = bxx * g00 + bxy * g10 + a12 * bxy + k * (byy / det - f * bxx)
    # mean of r01 and r10, which agree once a12 symmetrizes r
    out[1] = (0.5 * (bxx * g01 + bxy * g11 + bxy * g00 + byy * g10 + a12 * (byy - bxx))
              + k * (-bxy / det - f * bxy))
    out[2] = bxy * g01 + byy * g11 - a12 * bxy + k * (bxx / det - f * byy)
    return out


@dataclass
class OracleResult:
    c_direct: np.ndarray
    c_from_b: np.ndarray
    b: np.ndarray
    spd_loss_time: Optional[float] = None
    max_trace: float = 0.0


def _rk4(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def pointwise_oracle(c0, g, p, t_end, dt):
    """Integrate both formulations under a frozen velocity gradient.

    The conformation path and the square-root path are advanced with
    classical RK4 from ``c0`` and ``sqrt(c0)``; ``c_from_b = b @ b`` at the
    end. Stacks of ``c0``/``g`` are integrated together.
    """
    c0 = np.asarray(c0, dtype=float)
    g = np.asarray(g, dtype=float)
    if t_end < 0 or dt <= 0:
        raise ValueError("need t_end >= 0 and dt > 0")
    nsteps = int(round(t_end / dt))
    h = t_end / nsteps if nsteps else 0.0
    c = c0.copy()
    b = ta.sqrt_sym(c0)
    spd_loss = None
    max_tr = float(np.max(ta.trace(c)))
    for n in range(nsteps):
        c = _rk4(lambda y: rhs_c(y, g, p), c, h)
        b = _rk4(lambda y: rhs_b(y, g, p), b, h)
        if spd_loss is None and not np.all(ta.min_eig(c) > 0):
            spd_loss = (n + 1) * h
        max_tr = max(max_tr, float(np.max(ta.trace(c))))
    return OracleResult(c_direct=c, c_from_b=b @ b, b=b,
                        spd_loss_time=spd_loss, max_trace=max_tr)
