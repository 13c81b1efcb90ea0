#!/usr/bin/env python3
"""Seeded repeats of the noisy-best teacher/student pipeline; reports
clean-test accuracy of the last checkpoint, NT, and NS per run."""

import argparse
import json
import time
from pathlib import Path

from nll.experiments import NtsBenchmarkConfig, emit_report, run_nts_benchmark

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(ROOT / "configs" / "acceptance_nts.json"))
    parser.add_argument("--out", default="out/nts")
    args = parser.parse_args()

    doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    cfg = NtsBenchmarkConfig.from_json_dict(doc.get("benchmark", doc))
    start = time.perf_counter()
    report = run_nts_benchmark(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    emit_report(report, "json", out / "nts_benchmark.json")

    for run in report["runs"]:
        print(
            f"repeat {run['repeat']}: last {run['last_epoch_acc']:.4f}  "
            f"nt {run['nt_acc']:.4f} (step {run['nt_step']})  ns {run['ns_acc']:.4f} (step {run['ns_step']})"
        )
    med = report["medians"]
    print(f"medians: last {med['last_epoch_acc']:.4f}  nt {med['nt_acc']:.4f}  ns {med['ns_acc']:.4f}")
    print(f"done in {(time.perf_counter() - start) / 60:.1f} min -> {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
