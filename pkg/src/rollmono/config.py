"""Run configuration: flat key-value text with section headers (INI).

Every field has a default matching the reference parameter set
I1=1, I3=1.5, b1=1, b3=2, m=1, g=1; command-line flags override file
values.  The full schema is documented in the README.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, fields

from .core import BodyParams, Model
from .flow import IntegratorConfig


@dataclass
class RunConfig:
    # [run]
    model: str = "smooth"
    out: str = "out"
    seed: int = 1
    workers: int = 0          # 0: use ROLLMONO_WORKERS or serial
    # [body]
    I1: float = 1.0
    I3: float = 1.5
    b1: float = 1.0
    b3: float = 2.0
    m: float = 1.0
    g: float = 1.0
    # [integrator]
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_step: float = 0.0     # 0: unbounded
    renorm: bool = True
    horizon: float = 500.0
    # [monodromy]
    plane: str = ""           # p_psi | p_phi | c1 | c2; empty: model default
    plane_value: float = 0.157
    enclose: str = "1"        # 1 | 2 | both
    radius: float = 0.0       # 0: 0.05 for single threads, auto for 'both'
    samples: int = 128
    margin: float = 0.1
    # [grid]
    j_min: float = -1.5
    j_max: float = 1.5
    j_points: int = 21
    spin_min: float = -3.0
    spin_max: float = 3.0
    spin_points: int = 61
    slice_value: float = 0.157
    slice_points: int = 81
    # [simulate]
    M: str = "0.1,0.0,0.157"
    gamma: str = "0.0,0.6,0.8"
    t_end: float = 100.0
    n_states: int = 20

    _SECTIONS = {
        "run": ("model", "out", "seed", "workers"),
        "body": ("I1", "I3", "b1", "b3", "m", "g"),
        "integrator": ("rel_tol", "abs_tol", "max_step", "renorm", "horizon"),
        "monodromy": ("plane", "plane_value", "enclose", "radius", "samples", "margin"),
        "grid": ("j_min", "j_max", "j_points", "spin_min", "spin_max",
                 "spin_points", "slice_value", "slice_points"),
        "simulate": ("M", "gamma", "t_end", "n_states"),
    }

    def body_params(self) -> BodyParams:
        return BodyParams(self.I1, self.I3, self.b1, self.b3, self.m, self.g)

    def integrator(self) -> IntegratorConfig:
        max_step = self.max_step if self.max_step > 0.0 else float("inf")
        return IntegratorConfig(self.rel_tol, self.abs_tol, max_step, self.renorm)

    def model_tag(self) -> Model:
        try:
            return Model(self.model)
        except ValueError:
            raise ValueError(f"unknown model {self.model!r}; use smooth or rough")


def parse_vector(text: str):
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected three comma-separated numbers, got {text!r}")
    return parts


def load_config(path: str | None) -> RunConfig:
    """Defaults, overlaid with the key-value file at ``path`` when given."""
    cfg = RunConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep key case: body params are case sensitive
    with open(path, "r", encoding="utf-8") as fh:
        parser.read_file(fh)
    types = {f.name: f.type for f in fields(RunConfig)}
    for section, keys in RunConfig._SECTIONS.items():
        if not parser.has_section(section):
            continue
        for key, raw in parser.items(section):
            if key not in keys:
                raise ValueError(f"unknown key [{section}] {key}")
            kind = types[key]
            if kind == "bool":
                value = raw.strip().lower() in ("1", "true", "yes", "on")
            elif kind == "int":
                value = int(raw)
            elif kind == "float":
                value = float(raw)
            else:
                value = raw.strip()
            setattr(cfg, key, value)
    return cfg
