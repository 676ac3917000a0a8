"""Run configuration files, binary snapshots and CSV tables.

Config files are flat ``key = value`` text (``#`` starts a comment). The
canonical form lists every key once, in :data:`CONFIG_KEYS` order.

A snapshot is an ASCII header followed by raw little-endian float64 blocks::

    VEFS1
    N = 64
    t = 1.5
    ...
    fields = u_x u_y c_xx c_xy c_yy b_xx b_xy b_yy
    END
    <N*N doubles per field, row-major, first index x, second index y>
"""

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fields
from .constitutive import Formulation, ModelKind, ModelParams
from .errors import ConfigError
from .sim import InitialCondition, SimConfig

MAGIC = "VEFS1"

_NONE = ("none", "auto", "")


def _opt_float(text):
    return None if text.strip().lower() in _NONE else float(text)


def _pos_int(text):
    v = int(text)
    if v <= 0:
        raise ValueError("must be positive")
    return v


CONFIG_KEYS = {
    # key: (parser, default)
    "model": (lambda v: ModelKind(v.strip().lower()).value, "oldroyd_b"),
    "formulation": (lambda v: Formulation(v.strip().lower()).value, "sqrt_b"),
    "N": (_pos_int, 128),
    "Wi": (float, 5.0),
    "s": (float, 0.5),
    "l2": (float, 100.0),
    "dt": (_opt_float, None),
    "t_end": (float, 10.0),
    "ic": (lambda v: InitialCondition(v.strip().lower()).value, "isotropic"),
    "epsilon": (float, 0.01),
    "snapshot_interval": (_opt_float, None),
    "diagnostic_interval": (_opt_float, 0.1),
    "seed": (int, 0),
    "output_dir": (str.strip, "vefs_out"),
}


def _fmt(v):
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_config(text, overrides=None):
    """Parse ``key = value`` text into a complete dict with defaults filled in.

    Raises ConfigError for unknown keys, duplicates or unparsable values.
    ``overrides`` (mapping or ``key=value`` strings) are applied last.
    """
    cfg = {k: d for k, (_, d) in CONFIG_KEYS.items()}
    seen = set()
    items = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        items.append((key, value))
    if overrides:
        if isinstance(overrides, dict):
            items.extend((k, str(v)) for k, v in overrides.items())
        else:
            for item in overrides:
                if "=" not in item:
                    raise ConfigError(f"override {item!r} is not key=value")
                key, value = item.split("=", 1)
                items.append((key.strip(), value.strip()))
    for key, value in items:
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        parser = CONFIG_KEYS[key][0]
        try:
            cfg[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {value!r} ({exc})") from None
    return cfg


def serialize_config(cfg):
    """Canonical text: every key in fixed order."""
    return "".join(f"{k} = {_fmt(cfg[k])}\n" for k in CONFIG_KEYS)


def load_config(path, overrides=None):
    cfg = parse_config(Path(path).read_text(), overrides)
    env_dir = os.environ.get("VEFS_OUTPUT_DIR")
    if env_dir:
        cfg["output_dir"] = env_dir
    return cfg


def config_hash(cfg):
    """SHA-256 of the canonical config text without the output directory."""
    physics = dict(cfg, output_dir="")
    return hashlib.sha256(serialize_config(physics).encode()).hexdigest()[:16]


def to_sim_config(cfg):
    try:
        model = ModelParams(kind=cfg["model"], Wi=cfg["Wi"], s=cfg["s"], l2=cfg["l2"])
        return SimConfig(N=cfg["N"], model=model, formulation=cfg["formulation"],
                         dt=cfg["dt"], t_end=cfg["t_end"], ic=cfg["ic"],
                         epsilon=cfg["epsilon"], snapshot_interval=cfg["snapshot_interval"],
                         diagnostic_interval=cfg["diagnostic_interval"], seed=cfg["seed"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def from_sim_config(sc, output_dir="vefs_out"):
    return {
        "model": sc.model.kind.value, "formulation": sc.formulation.value, "N": sc.N,
        "Wi": float(sc.model.Wi), "s": float(sc.model.s), "l2": float(sc.model.l2),
        "dt": float(sc.dt), "t_end": float(sc.t_end), "ic": sc.ic.value,
        "epsilon": float(sc.epsilon),
        "snapshot_interval": sc.snapshot_interval, "diagnostic_interval": sc.diagnostic_interval,
        "seed": sc.seed, "output_dir": output_dir,
    }


@dataclass
class Snapshot:
    header: dict
    fields: dict

    @property
    def N(self):
        return int(self.header["N"])

    @property
    def t(self):
        return float(self.header["t"])

    @property
    def formulation(self):
        return self.header["formulation"]

    def velocity(self):
        return np.stack([self.fields["u_x"], self.fields["u_y"]])

    def conformation(self):
        return np.stack([self.fields["c_xx"], self.fields["c_xy"], self.fields["c_yy"]])


def snapshot_fields(state, sc):
    """Named physical fields of a state (unfiltered)."""
    u = state.u()
    q = state.q()
    out = {"u_x": u[0], "u_y": u[1]}
    if sc.formulation is Formulation.SQRT_B:
        c = fields.square(q)
    else:
        c = q
    for name, comp in zip(fields.COMPONENTS, c):
        out["c_" + name] = comp
    if sc.formulation is Formulation.SQRT_B:
        for name, comp in zip(fields.COMPONENTS, q):
            out["b_" + name] = comp
    return out


def write_snapshot(path, state, sc):
    data = snapshot_fields(state, sc)
    header = {
        "N": sc.N, "t": float(state.t), "step": state.step_count,
        "model": sc.model.kind.value, "formulation": sc.formulation.value,
        "Wi": float(sc.model.Wi), "s": float(sc.model.s), "l2": float(sc.model.l2),
        "fields": " ".join(data),
    }
    write_snapshot_arrays(path, header, data)


def write_snapshot_arrays(path, header, data):
    header = dict(header, fields=" ".join(data))
    lines = [MAGIC] + [f"{k} = {_fmt(v)}" for k, v in header.items()] + ["END", ""]
    with open(path, "wb") as fh:
        fh.write("\n".join(lines).encode("ascii"))
        for arr in data.values():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_snapshot(path):
    raw = Path(path).read_bytes()
    end = raw.find(b"\nEND\n")
    if not raw.startswith(MAGIC.encode() + b"\n") or end < 0:
        raise ValueError(f"{path}: not a {MAGIC} snapshot")
    header = {}
    for line in raw[len(MAGIC) + 1:end].decode("ascii").splitlines():
        key, value = (p.strip() for p in line.split("=", 1))
        header[key] = value
    N = int(header["N"])
    names = header["fields"].split()
    body = np.frombuffer(raw, dtype="<f8", offset=end + 5)
    if body.size != len(names) * N * N:
        raise ValueError(f"{path}: expected {len(names)} blocks of {N}x{N}, got {body.size} values")
    blocks = body.reshape(len(names), N, N)
    return Snapshot(header, {n: blocks[i].copy() for i, n in enumerate(names)})


def write_csv(path, header, rows, comments=()):
    """Minimal deterministic CSV writer (floats via ``repr``)."""
    with open(path, "w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(float(v)) if isinstance(v, (float, np.floating))
                              else str(v) for v in row) + "\n")


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
