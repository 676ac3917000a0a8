"""Experiment drivers: accuracy tables, stability event logs, FENE-P studies.

Every study is described by an :class:`ExperimentSpec`. Runs are plain
:func:`vefs.sim.run` calls keyed by their :class:`~vefs.sim.SimConfig`; a
shared :class:`RunCache` lets several studies reuse the same reference run.
Rows carry the config hash, seed, ``N`` and ``dt`` of the run they came from
and are sorted before they are written, so tables do not depend on the order
in which runs finished.
"""

import enum
import logging
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from . import diagnostics as dg
from . import io
from .constitutive import Formulation, ModelKind, ModelParams
from .errors import ConfigError
from .sim import InitialCondition, SimConfig, default_dt, run

log = logging.getLogger(__name__)


class Study(str, enum.Enum):
    ACCURACY = "accuracy"
    TREND = "trend"
    STABILITY = "stability"
    FENEP = "fenep"


BOTH = (Formulation.DIRECT_C, Formulation.SQRT_B)


def _pow2(n):
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class ExperimentSpec:
    """One study.

    ``t_end`` is the evaluation time of accuracy studies (a scaled time
    ``T = t / Wi`` when ``scaled_time`` is set) and the horizon of stability
    studies. ``dt = None`` gives every grid its own ``default_dt(N)``, so the
    reference at ``N_ref`` also carries the smallest time-stepping error. A
    step shared with the reference would cancel the direct formulation's
    time error against a direct reference but not the square root's.
    A FENE-P study holds its accuracy arm in ``accuracy``.
    """

    study: Study
    Wi: Tuple[float, ...]
    Ns: Tuple[int, ...]
    N_ref: Optional[int] = None
    t_end: float = 10.0
    scaled_time: bool = False
    formulations: Tuple[Formulation, ...] = BOTH
    model: ModelParams = ModelParams()
    dt: Optional[float] = None
    ic: InitialCondition = InitialCondition.ISOTROPIC
    epsilon: float = 0.01
    seed: int = 0
    accuracy: Optional["ExperimentSpec"] = None

    def __post_init__(self):
        object.__setattr__(self, "study", Study(self.study))
        object.__setattr__(self, "ic", InitialCondition(self.ic))
        object.__setattr__(self, "formulations", tuple(Formulation(f) for f in self.formulations))
        object.__setattr__(self, "Wi", tuple(float(w) for w in self.Wi))
        object.__setattr__(self, "Ns", tuple(int(n) for n in self.Ns))
        if not self.Wi or not self.Ns:
            raise ConfigError("need at least one Wi and one N")
        for n in self.Ns + ((self.N_ref,) if self.N_ref else ()):
            if not _pow2(n):
                raise ConfigError(f"grid sizes must be powers of two, got {n}")
        if self.study in (Study.ACCURACY, Study.TREND):
            if self.N_ref is None or self.N_ref <= max(self.Ns):
                raise ConfigError(f"N_ref = {self.N_ref} must exceed every N in {self.Ns}")

    def time_for(self, Wi):
        return self.t_end * Wi if self.scaled_time else self.t_end

    def config(self, N, Wi, formulation, t_end=None, dt=None):
        model = replace(self.model, Wi=Wi)
        if dt is None:
            dt = self.dt
        if dt is None:
            dt = default_dt(N)
        return SimConfig(N=N, model=model, formulation=formulation, dt=dt,
                         t_end=self.time_for(Wi) if t_end is None else t_end,
                         ic=self.ic, epsilon=self.epsilon, seed=self.seed,
                         diagnostic_interval=None)


class RunResult(NamedTuple):
    config: SimConfig
    field: np.ndarray           # final c (or S for FENE-P accuracy comparisons)
    report: dg.ExperimentReport
    t_reached: float
    max_tr: float                # over every step, on the field the kernels see
    min_eig: float
    seconds: float


class RunCache:
    """Memo of finished runs keyed by their SimConfig."""

    def __init__(self):
        self._runs: Dict[SimConfig, RunResult] = {}

    def get(self, cfg):
        if cfg not in self._runs:
            self._runs[cfg] = execute(cfg)
        return self._runs[cfg]

    def __len__(self):
        return len(self._runs)


def execute(cfg):
    """Run one configuration, tracking the extreme trace and eigenvalue."""
    extremes = [-math.inf, math.inf]

    def track(state):
        min_eig, max_tr, _ = state.monitor
        extremes[0] = max(extremes[0], max_tr)
        extremes[1] = min(extremes[1], min_eig)

    start = time.perf_counter()
    state, report = run(cfg, on_step=track)
    track(state)
    c = state.c(cfg.formulation)
    log.info("N=%d Wi=%g %s: t=%g in %.1fs", cfg.N, cfg.model.Wi, cfg.formulation.value,
             state.t, time.perf_counter() - start)
    return RunResult(cfg, c, report, state.t, extremes[0], extremes[1],
                     time.perf_counter() - start)


def provenance(cfg):
    return {"config_hash": io.config_hash(io.from_sim_config(cfg, "")),
            "seed": cfg.seed, "N": cfg.N, "dt": cfg.step_dt}


def _compare_field(res):
    if res.config.model.kind is ModelKind.FENE_P:
        return dg.s_tensor(res.field, res.config.model.l2)
    return res.field


class AccuracyRow(NamedTuple):
    Wi: float
    t: float
    N: int
    formulation: str
    l1_rel_error: float
    improvement: float
    flag: str
    config_hash: str
    seed: int
    dt: float


def run_accuracy(spec, cache=None):
    """Error table of both formulations against a DirectC run at ``N_ref``.

    The ``improvement`` column repeats the per-``(Wi, N)`` value on each row.
    A row whose run (or reference) blew up has NaN errors and a flag.
    """
    if spec.study not in (Study.ACCURACY, Study.TREND):
        raise ConfigError(f"run_accuracy needs an accuracy study, got {spec.study.value}")
    cache = cache or RunCache()
    rows = []
    for Wi in spec.Wi:
        ref = cache.get(spec.config(spec.N_ref, Wi, Formulation.DIRECT_C))
        ref_ok = ref.report.completed
        exact = _compare_field(ref) if ref_ok else None
        for N in spec.Ns:
            errs, flags, provs = {}, {}, {}
            for f in spec.formulations:
                res = cache.get(spec.config(N, Wi, f))
                provs[f] = provenance(res.config)
                if not ref_ok:
                    errs[f], flags[f] = math.nan, "reference blew up"
                elif not res.report.completed:
                    errs[f], flags[f] = math.nan, f"blew up at t={res.report.blow_up.t:g}"
                else:
                    errs[f], flags[f] = dg.l1_rel_error(_compare_field(res), exact).value, ""
            impr = math.nan
            if set(BOTH) <= set(errs) and errs[Formulation.DIRECT_C] > 0:
                impr = dg.improvement(errs[Formulation.DIRECT_C], errs[Formulation.SQRT_B])
            for f in spec.formulations:
                p = provs[f]
                rows.append(AccuracyRow(Wi, spec.time_for(Wi), N, f.value, errs[f], impr,
                                        flags[f], p["config_hash"], p["seed"], p["dt"]))
    return sorted(rows)


class StabilityRow(NamedTuple):
    Wi: float
    N: int
    formulation: str
    horizon: float
    t_reached: float
    completed: bool
    blow_up_t: float
    blow_up_reason: str
    spd_loss_t: float
    max_tr_c: float
    min_eig_c: float
    config_hash: str
    seed: int
    dt: float


@dataclass
class StabilityLog:
    rows: List[StabilityRow] = field(default_factory=list)
    series: Dict[Tuple[float, str], List[dg.DiagnosticRow]] = field(default_factory=dict)


def _stability_row(res, horizon):
    rep = res.report
    p = provenance(res.config)
    return StabilityRow(res.config.model.Wi, res.config.N, res.config.formulation.value,
                        horizon, res.t_reached, rep.completed,
                        rep.blow_up.t if rep.blow_up else math.nan,
                        rep.blow_up.reason if rep.blow_up else "",
                        rep.spd_loss.t if rep.spd_loss else math.nan,
                        res.max_tr, res.min_eig, p["config_hash"], p["seed"], p["dt"])


def sqrt_horizon(t_fail, horizon):
    """SqrtB must outlast ``max(5 t_fail, horizon)``."""
    return horizon if t_fail is None or math.isnan(t_fail) else max(5.0 * t_fail, horizon)


def run_stability(spec, cache=None, diagnostic_interval=1.0):
    """Event log of perturbed runs; SqrtB runs to ``max(5 t*, t_end)``.

    DirectC is run first at each ``(Wi, N)`` up to ``t_end``; when it blows
    up at ``t*`` the SqrtB horizon is stretched to ``5 t*`` if that is longer.
    """
    if spec.study not in (Study.STABILITY, Study.FENEP):
        raise ConfigError(f"run_stability needs a stability study, got {spec.study.value}")
    cache = cache or RunCache()
    out = StabilityLog()
    for Wi in spec.Wi:
        for N in spec.Ns:
            t_fail = None
            for f in sorted(spec.formulations, key=lambda f: f is Formulation.SQRT_B):
                horizon = spec.t_end
                if f is Formulation.SQRT_B:
                    horizon = sqrt_horizon(t_fail, spec.t_end)
                cfg = replace(spec.config(N, Wi, f, t_end=horizon),
                              diagnostic_interval=diagnostic_interval)
                res = cache.get(cfg)
                if f is Formulation.DIRECT_C and res.report.blow_up:
                    t_fail = res.report.blow_up.t
                out.rows.append(_stability_row(res, horizon))
                out.series[(Wi, f.value)] = list(res.report.series)
    out.rows.sort()
    return out


def stability_ordering(rows):
    """True when, at every (Wi, N), SqrtB lasted at least as long as DirectC."""
    by_key = {}
    for r in rows:
        by_key.setdefault((r.Wi, r.N), {})[r.formulation] = r
    ok = True
    for pair in by_key.values():
        d, s = pair.get(Formulation.DIRECT_C.value), pair.get(Formulation.SQRT_B.value)
        if d and s:
            ok &= s.t_reached >= d.t_reached
    return ok


def run_fenep(spec, cache=None):
    """FENE-P accuracy arm (S-tensor errors) plus stability arm."""
    if spec.study is not Study.FENEP or spec.model.kind is not ModelKind.FENE_P:
        raise ConfigError("run_fenep needs a FENE-P study")
    cache = cache or RunCache()
    table = run_accuracy(spec.accuracy, cache) if spec.accuracy else []
    return table, run_stability(spec, cache)


# presets

def preset(study, scale="desk"):
    """Named configurations: ``desk`` (default), ``paper`` or ``smoke`` (tiny, for tests)."""
    study = Study(study)
    if scale not in ("desk", "paper", "smoke"):
        raise ConfigError(f"unknown scale {scale!r}")
    ob = ModelParams(ModelKind.OLDROYD_B)
    N_ref = {"desk": 512, "paper": 2048, "smoke": 64}[scale]
    Ns = {"desk": (64, 128, 256), "paper": (32, 64, 128, 256, 512, 1024),
          "smoke": (16, 32)}[scale]
    if study is Study.ACCURACY:
        return ExperimentSpec(study, (5.0,), Ns, N_ref, t_end=1.0 if scale == "smoke" else 10.0,
                              model=ob)
    if study is Study.TREND:
        mid = {"desk": (128,), "paper": (256,), "smoke": (32,)}[scale]
        return ExperimentSpec(study, (1.0, 2.0, 3.0, 4.0, 5.0), mid, N_ref,
                              t_end=0.2 if scale == "smoke" else 2.0, scaled_time=True,
                              model=ob)
    stab_N = {"desk": 128, "paper": 256, "smoke": 32}[scale]
    horizon = {"desk": 100.0, "paper": 1500.0, "smoke": 2.0}[scale]
    if study is Study.STABILITY:
        return ExperimentSpec(study, (10.0,), (stab_N,), t_end=horizon, model=ob,
                              ic=InitialCondition.PERTURBED)
    fenep_ref = {"desk": 512, "paper": 1024, "smoke": 64}[scale]
    fenep_Ns = {"desk": (128, 256), "paper": (256, 512), "smoke": (32,)}[scale]
    acc = ExperimentSpec(Study.ACCURACY, (5.0,), fenep_Ns, fenep_ref,
                         t_end=1.0 if scale == "smoke" else 10.0,
                         model=ModelParams(ModelKind.FENE_P, l2=100.0))
    Wis = (50.0,) if scale == "smoke" else (20.0, 50.0)
    return ExperimentSpec(Study.FENEP, Wis, (stab_N,), t_end=horizon,
                          model=ModelParams(ModelKind.FENE_P, l2=225.0),
                          ic=InitialCondition.PERTURBED, accuracy=acc)


# output

def write_accuracy(rows, out_dir, name="accuracy"):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    io.write_csv(out_dir / f"{name}.csv", AccuracyRow._fields, rows)
    return out_dir / f"{name}.csv"


def write_stability(log_, out_dir, name="stability"):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    io.write_csv(out_dir / f"{name}.csv", StabilityRow._fields, log_.rows)
    series_rows = [(Wi, f) + tuple(r) for (Wi, f), s in sorted(log_.series.items()) for r in s]
    io.write_csv(out_dir / f"{name}_series.csv",
                 ("Wi", "formulation") + dg.DiagnosticRow._fields, series_rows)
    return out_dir / f"{name}.csv"


def _md_table(header, rows):
    def cell(v):
        return f"{v:.4g}" if isinstance(v, float) else str(v)
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(cell(v) for v in r) + " |" for r in rows]
    return "\n".join(lines)


def summary_markdown(study, accuracy_rows=(), stability=None):
    parts = [f"# {Study(study).value} study", ""]
    if accuracy_rows:
        parts += ["## L1 relative errors", "",
                  _md_table(("Wi", "t", "N", "formulation", "error", "improvement", "flag"),
                            [r[:7] for r in accuracy_rows]), ""]
    if stability is not None:
        parts += ["## Events", "",
                  _md_table(("Wi", "N", "formulation", "horizon", "t reached", "blow-up t",
                             "SPD loss t", "max tr c", "min eig c"),
                            [(r.Wi, r.N, r.formulation, r.horizon, r.t_reached, r.blow_up_t,
                              r.spd_loss_t, r.max_tr_c, r.min_eig_c) for r in stability.rows]),
                  "", f"SqrtB lasted at least as long as DirectC everywhere: "
                  f"{stability_ordering(stability.rows)}", ""]
    return "\n".join(parts)


def run_study(study, scale, out_dir, cache=None):
    """Run a preset and write its CSV tables and ``summary.md`` into ``out_dir``."""
    spec = preset(study, scale)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache = cache or RunCache()
    acc, stab = [], None
    if spec.study in (Study.ACCURACY, Study.TREND):
        acc = run_accuracy(spec, cache)
        write_accuracy(acc, out_dir)
    elif spec.study is Study.STABILITY:
        stab = run_stability(spec, cache)
        write_stability(stab, out_dir)
    else:
        acc, stab = run_fenep(spec, cache)
        write_accuracy(acc, out_dir)
        write_stability(stab, out_dir)
    (out_dir / "summary.md").write_text(summary_markdown(study, acc, stab))
    return acc, stab
