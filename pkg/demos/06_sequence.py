"""A replication sequence with every method, its summary statistics and
the report files it writes."""

import tempfile

from benders_replay.harness import emit, run_sequence, summarize
from benders_replay.model import build_cflp, random_cflp

inst = build_cflp(random_cflp(4, 8, seed=6), name="demo_seq")
report = run_sequence(inst, M=5, K=10, master_seed=1)

for r in range(1, 6):
    print(f"rep {r}: z =", {m: round(report.value(m, r), 4) for m in report.methods[:3]}, "...")

overall = summarize([report])["overall"]
print(f"{'method':<15} {'time':>8} {'SP rounds':>10}")
for m in report.methods:
    print(f"{m:<15} {overall[m]['total_t']:8.3f} {overall[m]['sp_count']:10.2f}")

with tempfile.TemporaryDirectory() as d:
    for fmt in ("csv", "json", "cdf"):
        print(fmt, "->", [p.name for p in emit(report, fmt, d)])
