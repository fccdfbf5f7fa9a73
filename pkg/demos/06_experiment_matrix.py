"""
A small experiment matrix
=========================

Runs a worlds x planners x budgets matrix, then prints the summary table,
the carried-forward success curve for one cell and writes an SVG of the
executed paths. The same steps are available as ``incplan run``,
``incplan summarize``, ``incplan curves`` and ``incplan trace``.
"""

import sys
import tempfile

from incplan.experiments import ExperimentConfig, read_rows, read_timings, run_experiment, success_curve, summarize
from incplan.traces import emit_traces
from incplan.world import named_world

out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="incplan-")
cfg = ExperimentConfig(worlds=["wall_gap", "random:0", "random:1"], planners=["eitstar", "rrt_connect"],
                       budgets=["200it"], trials=5, seed=0, out=out)
path = run_experiment(cfg)
rows = read_rows(path)
print(f"{len(rows)} trials written to {path}")

table = summarize(rows, read_timings(out))
print(table.to_tsv())

for planner, series in success_curve(rows, "random:0", "200it").items():
    print(planner, "success by query:", [round(f, 2) for _, f in series[:10]])

svg = emit_traces([r for r in rows if r["world"] == "wall_gap"], named_world("wall_gap"), f"{out}/wall_gap.svg",
                  show_sensing=True)
print("traces in", svg)
