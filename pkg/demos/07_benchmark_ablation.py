"""
The synthetic benchmark and the ablation ladder
===============================================

Five built-in objectives with known optima turn optimizer changes into
numbers. Scores are normalized per objective so that a paired random
search sits at 0 and the known optimum at 100, and the ablation ladder
re-runs the same seeds with features switched on one group at a time:

    baseline   plain trust-region search, all flags off
    tuning     tightened restart floor
    arp        + good/bad region partitioning
    full       + mixed kernel and qualitative bandits

This demo uses a reduced budget so it finishes in seconds; scores at
this scale are noisy and can dip below zero. The command line
(``mixbo bench``) runs the full setting and writes the same artifacts.
"""

import json
import tempfile
from pathlib import Path

from mixbo import OptimizerConfig, builtin_objectives, run_ablation
from mixbo.bench import write_scores_json, write_traces_csv

# Two seeds and a 6x4 budget keep this quick; real comparisons want
# ten seeds and the default 16x8.
objectives = [ob for ob in builtin_objectives() if ob.noise_std == 0.0][:3]
config = OptimizerConfig(batch_size=4, max_iterations=6)
report, traces = run_ablation(seeds=range(2), objectives=objectives, base_config=config)

print("objectives:", ", ".join(report["objectives"]))
print("seeds:", report["seeds"])
print()

# Per-objective scores, one row per arm. The random row defines the
# zero point of the scale, so it is 0 by construction.
header = f"{'arm':<10}" + "".join(f"{ob:>18}" for ob in report["objectives"])
print(header)
for arm in ["random", *report["arms"]]:
    row = f"{arm:<10}" + "".join(f"{report['scores'][arm][ob]:>18.1f}" for ob in report["objectives"])
    print(row)

print()
print("aggregates:", {arm: round(v, 1) for arm, v in report["aggregate"].items()})

# The artifacts round trip through plain CSV and JSON.
with tempfile.TemporaryDirectory() as tmp:
    write_traces_csv(traces, str(Path(tmp) / "traces.csv"))
    write_scores_json(report, str(Path(tmp) / "scores.json"))
    lines = (Path(tmp) / "traces.csv").read_text().splitlines()
    print()
    print("traces.csv:", len(lines) - 1, "rows, header:", lines[0])
    print("scores.json keys:", sorted(json.loads((Path(tmp) / "scores.json").read_text())))
