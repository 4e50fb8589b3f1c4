"""INI-style run configuration with ``section.key=value`` overrides.

Sections and keys mirror the harness and option fields one-to-one. Unknown
sections or keys raise ``InvalidConfig`` so typos never pass silently.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .engine import METHODS, BendersOptions
from .errors import InvalidConfig
from .model import CoreInstance, build_cflp, build_cmnd, random_cflp, random_cmnd

DEFAULTS: dict = {
    "instance": {
        "family": "cflp",
        "path": "",
        "seed": "0",
        "facilities": "5",
        "customers": "10",
        "capacity_ratio": "2.0",
        "penalty_factor": "5.0",
        "shortfall": "true",
        "demand_spread": "0.2",
        "nodes": "5",
        "arcs": "10",
        "commodities": "4",
        "cost_ratio": "1",
        "capacity_factor": "0.6",
    },
    "sequence": {
        "replications": "10",
        "scenarios": "20",
        "methods": ",".join(METHODS),
        "master_seed": "0",
        "sparse_baseline": "false",
        "time_limit": "3600",
        "scenario_path": "",
    },
    "solver": {
        "method": "baseline",
        "cut_mode": "multi",
        "mode": "auto",
        "gap_pct": "1e-4",
        "violation_tol": "1e-5",
        "iteration_limit": "10000",
        "node_limit": "1000000",
        "warm_start": "true",
        "theta_lower_bound": "0.0",
        "seed": "0",
        "boost_n": "",
        "gap_fallback": "true",
    },
    "output": {
        "dir": "out",
        "formats": "csv,json,cdf",
        "pool": "",
        "archive": "",
    },
}


def _bool(section: str, key: str, raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise InvalidConfig(f"{section}.{key}: expected a boolean, got {raw!r}")


def _num(section: str, key: str, raw: str, kind=float):
    try:
        return kind(float(raw)) if kind is int else kind(raw)
    except ValueError as exc:
        raise InvalidConfig(f"{section}.{key}: expected a number, got {raw!r}") from exc


def _list(raw: str) -> list:
    return [t.strip() for t in raw.split(",") if t.strip()]


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: {s: dict(kv) for s, kv in DEFAULTS.items()})

    # -- raw access

    def get(self, section: str, key: str) -> str:
        return self.values[section][key]

    def set(self, dotted: str, value: str) -> None:
        if "." not in dotted:
            raise InvalidConfig(f"override key {dotted!r} must look like section.key")
        section, key = dotted.split(".", 1)
        if section not in DEFAULTS:
            raise InvalidConfig(f"unknown config section {section!r}")
        if key not in DEFAULTS[section]:
            raise InvalidConfig(f"unknown config key {section}.{key}")
        self.values[section][key] = value

    def echo(self) -> dict:
        return {s: dict(kv) for s, kv in self.values.items()}

    # -- typed views

    @property
    def family(self) -> str:
        fam = self.get("instance", "family").lower()
        if fam not in ("cflp", "cmnd"):
            raise InvalidConfig(f"instance.family must be cflp or cmnd, got {fam!r}")
        return fam

    def instance(self) -> CoreInstance:
        s = self.values["instance"]
        if s["path"]:
            from .io import load_instance

            return load_instance(s["path"])
        seed = _num("instance", "seed", s["seed"], int)
        if self.family == "cflp":
            F = _num("instance", "facilities", s["facilities"], int)
            C = _num("instance", "customers", s["customers"], int)
            cfg = random_cflp(
                F, C, seed,
                capacity_ratio=_num("instance", "capacity_ratio", s["capacity_ratio"]),
                penalty_factor=_num("instance", "penalty_factor", s["penalty_factor"]),
                shortfall=_bool("instance", "shortfall", s["shortfall"]),
            )
            cfg.demand_spread = _num("instance", "demand_spread", s["demand_spread"])
            return build_cflp(cfg, name=f"cflp_{F}x{C}_s{seed}")
        N = _num("instance", "nodes", s["nodes"], int)
        A = _num("instance", "arcs", s["arcs"], int)
        Kc = _num("instance", "commodities", s["commodities"], int)
        cfg = random_cmnd(N, A, Kc, seed, cost_ratio=_num("instance", "cost_ratio", s["cost_ratio"], int),
                          capacity_factor=_num("instance", "capacity_factor", s["capacity_factor"]))
        return build_cmnd(cfg, name=f"cmnd_{N}_{A}_{Kc}_s{seed}")

    def options(self) -> BendersOptions:
        s = self.values["solver"]
        opt = BendersOptions(
            method=s["method"],
            cut_mode=s["cut_mode"],
            mode=s["mode"],
            gap_pct=_num("solver", "gap_pct", s["gap_pct"]),
            violation_tol=_num("solver", "violation_tol", s["violation_tol"]),
            iteration_limit=_num("solver", "iteration_limit", s["iteration_limit"], int),
            node_limit=_num("solver", "node_limit", s["node_limit"], int),
            warm_start=_bool("solver", "warm_start", s["warm_start"]),
            theta_lower_bound=_num("solver", "theta_lower_bound", s["theta_lower_bound"]),
            seed=_num("solver", "seed", s["seed"], int),
            boost_n=_num("solver", "boost_n", s["boost_n"], int) if s["boost_n"] else None,
            gap_fallback=_bool("solver", "gap_fallback", s["gap_fallback"]),
        )
        return opt.validate()

    @property
    def replications(self) -> int:
        return _num("sequence", "replications", self.get("sequence", "replications"), int)

    @property
    def scenario_counts(self) -> list:
        ks = [_num("sequence", "scenarios", k, int) for k in _list(self.get("sequence", "scenarios"))]
        if not ks or min(ks) < 1:
            raise InvalidConfig("sequence.scenarios needs one or more positive counts")
        return ks

    @property
    def methods(self) -> list:
        ms = _list(self.get("sequence", "methods"))
        bad = [m for m in ms if m not in METHODS]
        if bad or not ms:
            raise InvalidConfig(f"unknown methods {bad}; choose from {', '.join(METHODS)}")
        return ms

    @property
    def master_seed(self) -> int:
        return _num("sequence", "master_seed", self.get("sequence", "master_seed"), int)

    @property
    def sparse_baseline(self) -> bool:
        return _bool("sequence", "sparse_baseline", self.get("sequence", "sparse_baseline"))

    @property
    def time_limit(self) -> Optional[float]:
        raw = self.get("sequence", "time_limit").strip().lower()
        if raw in ("", "none", "inf"):
            return None
        return _num("sequence", "time_limit", raw)

    @property
    def formats(self) -> list:
        fmts = _list(self.get("output", "formats"))
        bad = [f for f in fmts if f not in ("csv", "json", "cdf")]
        if bad:
            raise InvalidConfig(f"unknown output formats {bad}")
        return fmts


def parse_override(text: str) -> tuple:
    if "=" not in text:
        raise InvalidConfig(f"override {text!r} must look like section.key=value")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


def load_config(path: Optional[str] = None, overrides: Iterable[str] = ()) -> RunConfig:
    """Defaults, then the INI file at ``path``, then ``section.key=value`` overrides."""
    cfg = RunConfig()
    if path:
        p = Path(path)
        if not p.is_file():
            raise InvalidConfig(f"config file {path!r} not found")
        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(p.read_text(encoding="utf-8"), source=str(p))
        except configparser.Error as exc:
            raise InvalidConfig(f"cannot parse {path}: {exc}") from exc
        for section in parser.sections():
            for key, value in parser.items(section):
                cfg.set(f"{section}.{key}", value)
    for item in overrides:
        cfg.set(*parse_override(item))
    return cfg
