"""Observables and error metrics for runs on the periodic grid."""

from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from . import fields, spectral
from . import tensor_algebra as ta
from .constitutive import Formulation
from .errors import CutoffExceeded, DegenerateDenominator, SizeMismatch

AREA = (2 * np.pi) ** 2


class DiagnosticRow(NamedTuple):
    t: float
    energy_kinetic: float
    energy_elastic: float
    max_tr_c: float
    min_eig_c: float


class Event(NamedTuple):
    t: float
    reason: str
    location: Optional[Tuple[float, float]] = None


class ErrorRow(NamedTuple):
    N: int
    formulation: str
    l1_rel_error: float


@dataclass
class ExperimentReport:
    series: List[DiagnosticRow] = field(default_factory=list)
    blow_up: Optional[Event] = None
    spd_loss: Optional[Event] = None
    error_table: List[ErrorRow] = field(default_factory=list)

    def record(self, row):
        if self.series and not row.t > self.series[-1].t:
            raise ValueError(f"diagnostic times must increase ({row.t} after {self.series[-1].t})")
        self.series.append(DiagnosticRow(*map(float, row)))

    @property
    def completed(self):
        return self.blow_up is None


def conformation(q, formulation):
    """``c`` from the evolved field: ``q`` itself or ``q @ q``."""
    if Formulation(formulation) is Formulation.SQRT_B:
        return fields.square(q)
    return np.asarray(q)


def grid_location(index, N):
    """Physical ``(x, y)`` of a flat or 2D grid index."""
    if np.ndim(index) == 0:
        index = np.unravel_index(int(index), (N, N))
    x = -np.pi + 2 * np.pi * np.asarray(index[-2:]) / N
    return float(x[0]), float(x[1])


def energy(u, c, p):
    """Kinetic ``1/2 int |u|^2`` and elastic proxy ``s/2 int tr c``.

    The elastic part drops the additive constant of the signed ``tr tau``
    form; both integrals use the (spectrally exact) grid mean.
    """
    u = np.asarray(u)
    kinetic = 0.5 * AREA * float(np.mean(u[0] ** 2 + u[1] ** 2))
    elastic = 0.5 * p.s * AREA * float(np.mean(fields.trace(c)))
    return kinetic, elastic


def s_tensor(c, l2):
    """Pointwise ``S = c / (1 - tr c / l2)``; CutoffExceeded where ``tr c >= l2``."""
    c = np.asarray(c, dtype=float)
    tr = fields.trace(c)
    bad = ~(tr < l2)
    if np.any(bad):
        loc = grid_location(np.argmax(bad), c.shape[-1])
        raise CutoffExceeded(f"tr c >= l2 = {l2:g} at (x, y) = {loc}", location=loc)
    return c / (1.0 - tr / l2)


class L1Error(NamedTuple):
    value: float
    relative: bool


def l1_rel_error(coarse, exact):
    """``sum |c_N - R(c_exact)| / sum |R(c_exact)|`` with ``R`` spectral restriction.

    Sums run over grid points and components. When the reference vanishes
    the absolute L1 norm is returned with ``relative=False``.
    """
    coarse = np.asarray(coarse, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if coarse.shape[:-2] != exact.shape[:-2]:
        raise SizeMismatch(f"component axes differ: {coarse.shape} vs {exact.shape}")
    ref = spectral.restrict(exact, coarse.shape[-1])
    if ref.shape != coarse.shape:
        raise SizeMismatch(f"{coarse.shape} vs restricted {ref.shape}")
    num = float(np.sum(np.abs(coarse - ref)))
    den = float(np.sum(np.abs(ref)))
    if den == 0.0:
        return L1Error(num, False)
    return L1Error(num / den, True)


def pointwise_error_profile(coarse, exact, component=0, line="x0"):
    """Errors along a grid line through the origin.

    ``line="x0"`` walks ``y`` along ``x = 0``; ``line="y0"`` walks ``x``
    along ``y = 0``. Returns rows ``(coordinate, abs_err, rel_err)``; the
    relative error is NaN where the reference vanishes.
    """
    coarse = np.asarray(coarse, dtype=float)
    ref = spectral.restrict(np.asarray(exact, dtype=float), coarse.shape[-1])
    if ref.shape != coarse.shape:
        raise SizeMismatch(f"{coarse.shape} vs restricted {ref.shape}")
    N = coarse.shape[-1]
    a, r = coarse[component], ref[component]
    if line == "x0":
        a, r = a[N // 2, :], r[N // 2, :]
    elif line == "y0":
        a, r = a[:, N // 2], r[:, N // 2]
    else:
        raise ValueError(f"line must be 'x0' or 'y0', got {line!r}")
    s = -np.pi + 2 * np.pi * np.arange(N) / N
    abs_err = np.abs(a - r)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel_err = np.where(r != 0, abs_err / np.abs(r), np.nan)
    return np.column_stack([s, abs_err, rel_err])


def improvement(err_c, err_b2):
    """``|err_c - err_b2| / |err_c|``."""
    if err_c == 0:
        raise DegenerateDenominator("improvement undefined for err_c = 0")
    return abs(err_c - err_b2) / abs(err_c)


def spd_monitor(q, formulation):
    """Minimum eigenvalue of ``c``, maximum ``tr c`` and where the minimum sits.

    For ``b`` the eigenvalues of ``c = b b`` are the squared eigenvalues of
    ``b``, which keeps the minimum exactly non-negative.
    """
    if Formulation(formulation) is Formulation.SQRT_B:
        lo, hi = ta.eigvals_sym2(q[0], q[1], q[2])
        lam = np.minimum(lo * lo, hi * hi)
        tr = q[0] ** 2 + 2 * q[1] ** 2 + q[2] ** 2
    else:
        lam = ta.eigvals_sym2(q[0], q[1], q[2])[0]
        tr = fields.trace(q)
    i = int(np.nanargmin(lam)) if np.any(np.isfinite(lam)) else 0
    return float(lam.flat[i]), float(np.max(tr)), grid_location(i, q.shape[-1])
