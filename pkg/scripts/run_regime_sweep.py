#!/usr/bin/env python3
"""Run the regime-transition sweep and write csv/json/svg reports.

Defaults to the pinned acceptance protocol in configs/acceptance_sweep.json
(about 20 minutes on two cores); pass --config for a custom sweep.
"""

import argparse
import json
import time
from pathlib import Path

from nll.experiments import SweepConfig, emit_report, merge_sweep_results, run_regime_sweep

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(ROOT / "configs" / "acceptance_sweep.json"))
    parser.add_argument("--out", default="out/sweep")
    args = parser.parse_args()

    doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    stages = doc["stages"] if "stages" in doc else [doc]
    start = time.perf_counter()
    results = []
    for i, stage in enumerate(stages):
        cfg = SweepConfig.from_json_dict(stage)
        print(f"stage {i + 1}/{len(stages)}: sizes {list(cfg.sizes)}, {cfg.repeats} repeats, max {cfg.train.max_steps} steps")
        results.append(run_regime_sweep(cfg))
    merged = merge_sweep_results(results)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    emit_report(merged, "csv", out / "sweep.csv")
    emit_report(merged, "json", out / "sweep.json")
    emit_report(merged, "svg", out / "sweep.svg")
    for agg in merged.aggregates:
        print(
            f"m={agg.m:>6d}: train {agg.mean_train_acc:.4f}+-{agg.std_train_acc:.4f} "
            f"test {agg.mean_test_acc:.4f}+-{agg.std_test_acc:.4f} failed={agg.n_failed}"
        )
    print(f"done in {(time.perf_counter() - start) / 60:.1f} min -> {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
