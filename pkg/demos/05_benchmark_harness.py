#!/usr/bin/env python3
"""The full benchmark pipeline, end to end.

Generate a stream to CSV, run an experiment matrix (variants x seeds) under
the prequential protocol, and rank the algorithms per window with the Friedman
test and the Nemenyi critical difference. Everything lands as plain CSV:
one report per run plus a summary and comparison - the same files the
`mtstream run` / `mtstream compare` commands produce.
"""

import json
import tempfile
from pathlib import Path

from mtstream.cli import main

workdir = Path(tempfile.mkdtemp(prefix="mtstream_demo_"))
print(f"working under {workdir}\n")

# --- materialize one stream as CSV + schema declaration --------------------------
gen_cfg = workdir / "generator.json"
gen_cfg.write_text(json.dumps({
    "name": "fried_demo",
    "generator": {"family": "friedman_mt", "n_examples": 4200, "n_targets": 3,
                  "noise_sd": 1.0, "seed": 31},
}, indent=2))
assert main(["generate", "--config", str(gen_cfg), "--out", str(workdir / "data")]) == 0

# --- run the matrix: 5 variants x 2 seeds, one dataset from disk ------------------
run_cfg = workdir / "run.json"
run_cfg.write_text(json.dumps({
    "datasets": [{
        "name": "fried_demo",
        "csv": str(workdir / "data" / "fried_demo.csv"),
        "schema": str(workdir / "data" / "fried_demo.csv.schema.json"),
    }],
    "variants": ["mean", "perceptron", "adaptive", "stacked", "stacked_adaptive"],
    "tree": {"grace_period": 200, "learning_rate": 0.01},
    "evaluation": {"window": 200, "warm_start": 200, "seeds": [0, 1]},
}, indent=2))
out_dir = workdir / "reports"
assert main(["run", "--config", str(run_cfg), "--out", str(out_dir), "--jobs", "1"]) == 0

print("\nreport files:")
for path in sorted(out_dir.glob("*.csv")):
    print(f"  {path.name}")

# --- the comparison verdict -------------------------------------------------------
print()
assert main(["compare", str(out_dir)]) == 0

print("summary.csv holds mean +/- sd error/time/size per (dataset, variant); "
      "each run CSV holds the windowed curves behind the ranks.")
