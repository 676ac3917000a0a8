"""Time integration of the 2D Stokes-polymer system on a periodic grid.

The evolved tensor ``q`` is either the conformation tensor ``c`` or its
symmetric square root ``b``; both live in spectral space and are advanced
with second-order Adams-Bashforth (one forward Euler step primes the
history). Each tendency evaluation filters every factor before it is
multiplied in physical space, and the assembled tendency is filtered once
more before it enters the update. The velocity solves the Stokes problem
``-lap u + grad p = div tau + f`` exactly after every step, with
``tau = -s * s(c)`` formed pointwise and filtered before the divergence.
"""

import enum
import functools
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import constitutive as cm
from . import diagnostics as dg
from . import fields, spectral
from . import tensor_algebra as ta
from .constitutive import Formulation, ModelKind, ModelParams
from .errors import (
    BlowUp,
    CutoffExceeded,
    DegenerateSystem,
    DegenerateTrace,
    NotPositiveDefinite,
    PerturbationTooLarge,
)

log = logging.getLogger(__name__)

PERTURBATION = np.array([[1.0, 0.5], [0.5, -1.0]])
MAX_TRACE = 1e12


class InitialCondition(str, enum.Enum):
    ISOTROPIC = "isotropic"
    PERTURBED = "perturbed"


def default_dt(N):
    """1e-3 at N = 256, scaled like 1/N."""
    return 1e-3 * 256.0 / N


@dataclass(frozen=True)
class SimConfig:
    N: int = 128
    model: ModelParams = ModelParams()
    formulation: Formulation = Formulation.SQRT_B
    dt: Optional[float] = None
    t_end: float = 10.0
    ic: InitialCondition = InitialCondition.ISOTROPIC
    epsilon: float = 0.01
    snapshot_interval: Optional[float] = None
    diagnostic_interval: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "formulation", Formulation(self.formulation))
        object.__setattr__(self, "ic", InitialCondition(self.ic))
        if self.dt is None:
            object.__setattr__(self, "dt", default_dt(self.N))
        if self.N <= 0 or self.N % 2:
            raise ValueError(f"N must be a positive even integer, got {self.N}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be non-negative, got {self.t_end}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")
        for name in ("snapshot_interval", "diagnostic_interval"):
            v = getattr(self, name)
            if v is not None and not v >= self.dt:
                raise ValueError(f"{name} = {v} must be at least dt = {self.dt}")

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))

    @property
    def step_dt(self):
        """Step size adjusted so that an integer number of steps hits ``t_end``."""
        n = self.n_steps
        return self.t_end / n if n else self.dt

    def every(self, interval):
        """Steps between outputs for an interval (None: only start and end)."""
        if interval is None:
            return None
        return max(1, int(round(interval / self.step_dt)))


@dataclass
class SimState:
    t: float
    q_hat: np.ndarray
    u_hat: np.ndarray
    prev_rhs: Optional[np.ndarray] = None
    step_count: int = 0
    monitor: tuple = field(default=(np.nan, np.nan, None), repr=False)
    # filtered physical q, reused by the next tendency evaluation
    q_filtered: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def grid(self):
        return spectral.make_grid(self.q_hat.shape[-2])

    def q(self):
        return spectral.inverse(self.q_hat, self.grid)

    def u(self):
        return spectral.inverse(self.u_hat, self.grid)

    def c(self, formulation):
        return dg.conformation(self.q(), formulation)


def forcing(grid):
    """Four-roll-mill body force ``(-2 sin x cos y, 2 cos x sin y)``."""
    X, Y = grid.mesh()
    return np.stack([-2.0 * np.sin(X) * np.cos(Y), 2.0 * np.cos(X) * np.sin(Y)])


@functools.lru_cache(maxsize=None)
def _forcing_hat_for(N):
    grid = spectral.make_grid(N)
    fh = spectral.forward(forcing(grid), grid)
    fh.setflags(write=False)
    return fh


def _forcing_hat(grid):
    return _forcing_hat_for(grid.N)


def _blowup(t, exc, N):
    loc = getattr(exc, "location", None)
    if loc is not None and len(loc) == 2 and isinstance(loc[0], (int, np.integer)):
        loc = dg.grid_location(loc, N)
    return BlowUp(t, f"{type(exc).__name__}: {exc}", loc)


def velocity(q_f, cfg, grid, t=0.0):
    """Stokes velocity (spectral) from the filtered physical tensor field."""
    c = dg.conformation(q_f, cfg.formulation)
    try:
        tau = -cfg.model.s * cm.relaxation_2d(c, cfg.model)
    except CutoffExceeded as exc:
        raise _blowup(t, exc, grid.N) from exc
    tau_h = spectral.smooth_filter(spectral.forward(tau, grid), grid)
    rhs = spectral.tensor_divergence(tau_h, grid) + _forcing_hat(grid)
    return spectral.stokes_solve(rhs, grid)


def initial_state(cfg):
    grid = spectral.make_grid(cfg.N)
    q = fields.identity(cfg.N)
    if cfg.ic is InitialCondition.PERTURBED and cfg.epsilon > 0:
        X, Y = grid.mesh()
        amp = cfg.epsilon * np.sin(X) * np.sin(Y)
        b = fields.identity(cfg.N) + amp * np.array([PERTURBATION[0, 0], PERTURBATION[0, 1],
                                                     PERTURBATION[1, 1]])[:, None, None]
        lam = ta.eigvals_sym2(*b)[0]
        if not np.all(lam > 0):
            raise PerturbationTooLarge(
                f"epsilon = {cfg.epsilon} leaves b(x, 0) indefinite (min eig {lam.min():.3g})")
        q = b if cfg.formulation is Formulation.SQRT_B else fields.square(b)
    q_hat = spectral.forward(q, grid)
    q_f = spectral.inverse(spectral.smooth_filter(q_hat, grid), grid)
    u_hat = velocity(q_f, cfg, grid)
    return SimState(t=0.0, q_hat=q_hat, u_hat=u_hat, step_count=0,
                    monitor=dg.spd_monitor(q_f, cfg.formulation), q_filtered=q_f)


def tendency(state, cfg):
    """Spectral right-hand side ``-u.grad q + rhs(q, grad u)`` (filtered)."""
    grid = state.grid
    q_f = state.q_filtered
    q_fh = spectral.smooth_filter(state.q_hat, grid)
    if q_f is None:
        q_f = spectral.inverse(q_fh, grid)
    u_fh = spectral.smooth_filter(state.u_hat, grid)
    ux, uy, g00, g01, g10 = spectral.inverse(np.stack([
        u_fh[0], u_fh[1], grid.ikx * u_fh[0], grid.ikx * u_fh[1], grid.iky * u_fh[0]]), grid)
    # incompressibility fixes d_y u_y = -d_x u_x
    g = (g00, g01, g10, -g00)
    dq = spectral.inverse(np.concatenate([grid.ikx * q_fh, grid.iky * q_fh]), grid)
    try:
        if cfg.formulation is Formulation.SQRT_B:
            r = cm.rhs_b_2d(q_f, g, cfg.model)
        else:
            r = cm.rhs_c_2d(q_f, g, cfg.model)
    except (CutoffExceeded, DegenerateTrace, DegenerateSystem, NotPositiveDefinite) as exc:
        raise _blowup(state.t, exc, grid.N) from exc
    r -= ux * dq[:3] + uy * dq[3:]
    return spectral.smooth_filter(spectral.forward(r, grid), grid)


def step(state, cfg):
    """One AB2 step (forward Euler when no history is available).

    Raises BlowUp when the new state is non-finite, when ``max tr c``
    exceeds 1e12 (Oldroyd-B), or when a pointwise kernel hits a degenerate
    configuration. Monitoring reads the filtered field the kernels see.
    """
    grid = state.grid
    dt = cfg.step_dt
    r = tendency(state, cfg)
    if state.prev_rhs is None:
        q_hat = state.q_hat + dt * r
    else:
        q_hat = state.q_hat + dt * (1.5 * r - 0.5 * state.prev_rhs)
    n = state.step_count + 1
    t = n * dt
    q_f = spectral.inverse(spectral.smooth_filter(q_hat, grid), grid)
    finite = np.isfinite(q_f).all(axis=0)
    if not finite.all():
        loc = dg.grid_location(np.argmin(finite), grid.N)
        raise BlowUp(t, "non-finite values", loc)
    mon = dg.spd_monitor(q_f, cfg.formulation)
    if cfg.model.kind is ModelKind.OLDROYD_B and mon[1] > MAX_TRACE:
        raise BlowUp(t, f"max tr c = {mon[1]:.3e} exceeds {MAX_TRACE:g}")
    u_hat = velocity(q_f, cfg, grid, t)
    return SimState(t=t, q_hat=q_hat, u_hat=u_hat, prev_rhs=r, step_count=n,
                    monitor=mon, q_filtered=q_f)


def diagnostic_row(state, cfg):
    q = state.q()
    c = dg.conformation(q, cfg.formulation)
    kin, ela = dg.energy(state.u(), c, cfg.model)
    min_eig, max_tr, _ = dg.spd_monitor(q, cfg.formulation)
    return dg.DiagnosticRow(state.t, kin, ela, max_tr, min_eig)


def run(cfg, on_snapshot: Optional[Callable] = None, on_step: Optional[Callable] = None):
    """Advance to ``t_end`` or the first blow-up.

    Blow-up is a recorded outcome (``report.blow_up``), not an exception;
    the returned state is then the last finite one. ``on_snapshot(state)``
    fires at ``t = 0``, every ``snapshot_interval`` and at the end.
    """
    state = initial_state(cfg)
    report = dg.ExperimentReport()
    diag_every = cfg.every(cfg.diagnostic_interval)
    snap_every = cfg.every(cfg.snapshot_interval)
    report.record(diagnostic_row(state, cfg))
    if on_snapshot is not None:
        on_snapshot(state)
    last_snap = 0
    _note_spd(report, state)
    while state.step_count < cfg.n_steps:
        try:
            state = step(state, cfg)
        except BlowUp as exc:
            report.blow_up = dg.Event(exc.t, exc.reason, exc.location)
            log.info("blow-up: %s", exc)
            break
        _note_spd(report, state)
        n = state.step_count
        if on_step is not None:
            on_step(state)
        if diag_every and n % diag_every == 0 or n == cfg.n_steps:
            report.record(diagnostic_row(state, cfg))
        if snap_every and n % snap_every == 0 or n == cfg.n_steps:
            if on_snapshot is not None and last_snap != n:
                on_snapshot(state)
                last_snap = n
    return state, report


def _note_spd(report, state):
    min_eig, _, loc = state.monitor
    if report.spd_loss is None and not min_eig > 0:
        report.spd_loss = dg.Event(state.t, f"min eigenvalue of c = {min_eig:.3e}", loc)


def with_model(cfg, **changes):
    """Copy of ``cfg`` with model parameters replaced."""
    return replace(cfg, model=replace(cfg.model, **changes))
