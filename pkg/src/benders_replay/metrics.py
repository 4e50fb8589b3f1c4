"""Per-replication metric record."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields


@dataclass
class ReplicationMetrics:
    total_t: float = 0.0
    lp_t: float = 0.0
    init_t: float = 0.0
    ip_t: float = 0.0
    iterations: int = 0
    sp_count: int = 0
    sp_solves: int = 0
    dsp_t: float = 0.0
    sp_t: float = 0.0
    cut_t: float = 0.0
    nodes: int = 0
    root_gap_pct: float = math.nan
    callback_calls: int = 0
    cuts_init: int = 0
    cuts_sp: int = 0
    cuts_dsp: int = 0
    cuts_feasibility: int = 0
    cuts_lp_retained: int = 0
    pool_full: int = 0
    pool_curated: int = 0
    final_gap_pct: float = math.nan
    init_sp_solves: int = 0

    TIME_FIELDS = ("total_t", "lp_t", "init_t", "ip_t", "dsp_t", "sp_t", "cut_t")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ReplicationMetrics":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})

    def non_time(self) -> dict:
        return {k: v for k, v in self.to_dict().items() if k not in self.TIME_FIELDS}
