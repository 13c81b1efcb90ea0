"""Scripted reproductions: regime sweeps, the tabular demonstration, bound
audits, and seeded teacher/student benchmark runs.

Every experiment is deterministic: each cell derives its own seed from
(base seed, cell coordinates), so any single cell can be recomputed in
isolation and a pooled run collates to the same output as a serial one.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from . import bounds as bounds_mod
from . import oracle
from .classify import confusion as classifier_confusion
from .data import DATASET_KINDS, make_dataset, split, tabular_world
from .errors import CapacityError, TrainingDiverged
from .mlp import MlpClassifier, TrainConfig, train_mlp
from .noise import TransitionMatrix, corrupt_labels, noise_rate, uniform_noise
from .nts import run_nts
from .rng import derive_seed

DEFAULT_WORKERS = max(1, min(os.cpu_count() or 1, 8))


# ---------------------------------------------------------------------------
# regime sweep


@dataclass(frozen=True)
class SweepConfig:
    """One sweep: a dataset generator, a noise matrix, training sizes, and a
    shared training configuration."""

    dataset_kind: str
    noise: TransitionMatrix
    sizes: tuple[int, ...]
    train: TrainConfig
    repeats: int = 10
    noise_sigma: float = 0.1
    test_size: int = 10000
    base_seed: int = 0
    workers: int | None = None

    def __post_init__(self):
        if self.dataset_kind not in DATASET_KINDS:
            raise ValueError(f"unknown dataset kind {self.dataset_kind!r}")
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes or any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("training sizes must be nonempty and strictly increasing")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        object.__setattr__(self, "sizes", sizes)

    def to_json_dict(self) -> dict:
        return {
            "dataset_kind": self.dataset_kind,
            "noise": {"k": self.noise.k, "rows": self.noise.rows.tolist()},
            "sizes": list(self.sizes),
            "train": self.train.to_json_dict(),
            "repeats": self.repeats,
            "noise_sigma": self.noise_sigma,
            "test_size": self.test_size,
            "base_seed": self.base_seed,
            "workers": self.workers,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SweepConfig":
        return cls(
            dataset_kind=doc["dataset_kind"],
            noise=TransitionMatrix(doc["noise"]["rows"]),
            sizes=tuple(doc["sizes"]),
            train=TrainConfig.from_json_dict(doc.get("train", {})),
            repeats=doc.get("repeats", 10),
            noise_sigma=doc.get("noise_sigma", 0.1),
            test_size=doc.get("test_size", 10000),
            base_seed=doc.get("base_seed", 0),
            workers=doc.get("workers"),
        )


@dataclass(frozen=True)
class SweepCell:
    m: int
    repeat: int
    final_train_acc: float
    final_test_acc: float
    confusion: tuple[float, ...]  # row-major K x K, vs true labels on clean test
    failed: bool
    error: str = ""


@dataclass(frozen=True)
class SweepAggregate:
    m: int
    n_cells: int
    n_failed: int
    mean_train_acc: float
    std_train_acc: float
    mean_test_acc: float
    std_test_acc: float


@dataclass(frozen=True)
class SweepResult:
    k: int
    cells: tuple[SweepCell, ...]
    aggregates: tuple[SweepAggregate, ...]


def cell_seed(base_seed: int, m: int, repeat: int) -> int:
    return derive_seed(base_seed, "cell", m, repeat)


def _cell_payload(cfg: SweepConfig, m: int, repeat: int) -> dict:
    return {
        "kind": cfg.dataset_kind,
        "sigma": cfg.noise_sigma,
        "noise_rows": cfg.noise.rows.tolist(),
        "m": m,
        "repeat": repeat,
        "train": cfg.train.to_json_dict(),
        "test_size": cfg.test_size,
        "base_seed": cfg.base_seed,
    }


def _run_cell_task(payload: dict) -> SweepCell:
    t = TransitionMatrix(payload["noise_rows"])
    m, repeat = payload["m"], payload["repeat"]
    seed = cell_seed(payload["base_seed"], m, repeat)
    clean = make_dataset(payload["kind"], m, payload["sigma"], derive_seed(seed, "train-data"))
    noisy = clean.with_labels(corrupt_labels(clean.labels, t, derive_seed(seed, "train-noise")))
    test = make_dataset(
        payload["kind"], payload["test_size"], payload["sigma"], derive_seed(payload["base_seed"], "clean-test")
    )
    cfg = TrainConfig.from_json_dict(payload["train"]).with_seed(derive_seed(seed, "train"))
    try:
        params, ckpts = train_mlp(noisy, cfg)
    except TrainingDiverged as exc:
        return SweepCell(m, repeat, math.nan, math.nan, (math.nan,) * (t.k * t.k), True, str(exc))
    clf = MlpClassifier(params)
    test_acc = float(np.mean(clf.predict(test.features) == test.labels))
    conf = classifier_confusion(clf, test)
    return SweepCell(
        m=m,
        repeat=repeat,
        final_train_acc=ckpts[-1].train_acc,
        final_test_acc=test_acc,
        confusion=tuple(float(v) for v in conf.rows.ravel()),
        failed=False,
    )


def run_sweep_cell(cfg: SweepConfig, m: int, repeat: int) -> SweepCell:
    """Recompute one cell in isolation; bit-identical to its pooled result."""
    return _run_cell_task(_cell_payload(cfg, m, repeat))


@contextmanager
def _single_thread_blas_env():
    names = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")
    saved = {name: os.environ.get(name) for name in names}
    for name in names:
        os.environ[name] = "1"
    try:
        yield
    finally:
        for name, value in saved.items():
            if value is None:
                os.environ.pop(name, None)
            else:
                os.environ[name] = value


def _pool_map(task, payloads: list, workers: int | None):
    workers = DEFAULT_WORKERS if workers is None else workers
    if workers <= 1 or len(payloads) <= 1:
        return [task(p) for p in payloads]
    # fresh interpreters with single-threaded BLAS; cells supply the
    # parallelism, so nested BLAS threads would only oversubscribe
    with _single_thread_blas_env():
        with ProcessPoolExecutor(max_workers=workers, mp_context=get_context("spawn")) as pool:
            return list(pool.map(task, payloads, chunksize=1))


def _aggregate(cells: list[SweepCell]) -> list[SweepAggregate]:
    by_m: dict[int, list[SweepCell]] = {}
    for cell in cells:
        by_m.setdefault(cell.m, []).append(cell)
    out = []
    for m in sorted(by_m):
        group = by_m[m]
        ok = [c for c in group if not c.failed]
        tr = np.array([c.final_train_acc for c in ok])
        te = np.array([c.final_test_acc for c in ok])
        out.append(
            SweepAggregate(
                m=m,
                n_cells=len(group),
                n_failed=len(group) - len(ok),
                mean_train_acc=float(tr.mean()) if len(ok) else math.nan,
                std_train_acc=float(tr.std()) if len(ok) else math.nan,
                mean_test_acc=float(te.mean()) if len(ok) else math.nan,
                std_test_acc=float(te.std()) if len(ok) else math.nan,
            )
        )
    return out


def run_regime_sweep(cfg: SweepConfig) -> SweepResult:
    """Train one model per (size, repeat) cell on freshly corrupted samples
    and aggregate final train/clean-test accuracies per size.

    Cells are independent tasks on a bounded worker pool; output order is
    fixed by (m, repeat) regardless of completion order.  Diverged cells
    are flagged, not fatal.
    """
    payloads = [_cell_payload(cfg, m, r) for m in cfg.sizes for r in range(cfg.repeats)]
    cells = _pool_map(_run_cell_task, payloads, cfg.workers)
    cells = sorted(cells, key=lambda c: (c.m, c.repeat))
    return SweepResult(k=cfg.noise.k, cells=tuple(cells), aggregates=tuple(_aggregate(cells)))


def merge_sweep_results(results: list[SweepResult]) -> SweepResult:
    """Collate cells from several sweeps (e.g. per-size-band step budgets)
    into one result with recomputed aggregates."""
    if not results:
        raise ValueError("nothing to merge")
    k = results[0].k
    if any(r.k != k for r in results):
        raise ValueError("cannot merge sweeps with different class counts")
    cells = sorted((c for r in results for c in r.cells), key=lambda c: (c.m, c.repeat))
    return SweepResult(k=k, cells=tuple(cells), aggregates=tuple(_aggregate(list(cells))))


# ---------------------------------------------------------------------------
# tabular demonstration


def run_tabular_demo(seed: int) -> dict:
    """The 8-point world at flip rate 1/4: the exact-distribution optimum and
    empirical maximizers at m = 4, 8, 32.

    The exact case certifies the 1 - eps ceiling and the uniqueness of the
    true labeling; the sampled cases show the memorization-to-optimal
    progression of training-accuracy maximizers.
    """
    world = tabular_world()
    t = uniform_noise(2, 0.25)
    prior = world.class_prior()

    h_best, value, unique = oracle.enumerate_best(world, "noisy", t=t)
    report = {
        "noise": {"k": t.k, "rows": t.rows.tolist()},
        "noise_rate": noise_rate(t, prior),
        "exact": {
            "max_noisy_accuracy": value,
            "unique": unique,
            "assignment": h_best.assignment.tolist(),
            "clean_accuracy": oracle.exact_clean_accuracy(h_best, world),
        },
        "samples": [],
    }
    from .data import sample_iid

    for m in (4, 8, 32):
        sample = sample_iid(world, m, t, derive_seed(seed, "tabular-demo", m))
        h_emp, train_acc, emp_unique = oracle.enumerate_best(world, "empirical", sample=sample)
        report["samples"].append(
            {
                "m": m,
                "optimal_train_accuracy": train_acc,
                "unique": emp_unique,
                "assignment": h_emp.assignment.tolist(),
                "clean_accuracy": oracle.exact_clean_accuracy(h_emp, world),
                "confusion": oracle.exact_confusion(h_emp, world).rows.tolist(),
            }
        )
    return report


# ---------------------------------------------------------------------------
# bound audits


def measured_worst_generalization_gap(
    world, t: TransitionMatrix, m: int, seed: int
) -> float:
    """Worst |training accuracy - exact noisy accuracy| over every
    deterministic classifier on the world's support, measured on one
    m-sample.  The uniform deviation the VC bound must dominate."""
    from .data import sample_iid

    sample = sample_iid(world, m, t, seed)
    idx = world.point_index(sample.features)
    counts = np.zeros((world.size, world.k))
    np.add.at(counts, (idx, sample.labels), 1.0)
    emp = counts / m
    dist = world.point_probs[:, None] * t.rows[world.true_labels]

    diff = emp - dist
    s, k = diff.shape
    total = k**s
    if total > oracle.ENUMERATION_CAP:
        raise CapacityError(f"{k}^{s} assignments exceed the enumeration cap")
    place = k ** np.arange(s - 1, -1, -1, dtype=np.int64)
    ids = np.arange(total, dtype=np.int64)
    digits = (ids[:, None] // place[None, :]) % k
    gaps = diff[np.arange(s)[None, :], digits].sum(axis=1)
    return float(np.max(np.abs(gaps)))


def run_bound_audit_suite(seed: int, quick: bool = False) -> dict:
    """Monte-Carlo audits of the validation bound on a grid of (n, delta)
    plus the VC bound evaluated on a grid and cross-checked against the
    measured worst-case gap of the enumerated tabular lookup family."""
    world = tabular_world()
    t = uniform_noise(2, 0.25)
    h_star = oracle.true_labeling(world)
    flipped = h_star.assignment.copy()
    flipped[0] = 1 - flipped[0]
    h_sub = oracle.DiscreteClassifier(flipped, world)

    grid = [(1000, 0.01, 2000 if quick else 10000), (1000, 1.0, 1000), (100, 0.05, 2000), (10000, 0.01, 500)]
    audits = []
    for name, h in (("optimal", h_star), ("one-point-flipped", h_sub)):
        for n, delta, trials in grid:
            audits.append(
                {
                    "classifier": name,
                    "n": n,
                    "delta": delta,
                    "trials": trials,
                    "bound": bounds_mod.validation_gap_bound(n, delta),
                    "violation_frequency": bounds_mod.audit_validation_bound(
                        h, world, t, n, delta, trials, derive_seed(seed, "audit", name, n)
                    ),
                }
            )

    gen_grid = []
    for m in (1000, 10**4, 10**5, 10**6):
        for d_vc in (2.0, 8.0):
            for delta in (0.05, 0.5):
                p = bounds_mod.BoundParams(d_vc=d_vc, delta=delta, m=m)
                gen_grid.append({"m": m, "d_vc": d_vc, "delta": delta, "bound": bounds_mod.generalization_gap_bound(p)})

    m_meas = 10**5
    worst = measured_worst_generalization_gap(world, t, m_meas, derive_seed(seed, "gen-gap"))
    gen_bound = bounds_mod.generalization_gap_bound(bounds_mod.BoundParams(d_vc=world.size, delta=0.05, m=m_meas))
    return {
        "validation_audits": audits,
        "generalization": {
            "grid": gen_grid,
            "measured": {
                "m": m_meas,
                "d_vc": world.size,
                "delta": 0.05,
                "bound": gen_bound,
                "worst_gap": worst,
                "bounded": worst <= gen_bound,
            },
        },
    }


# ---------------------------------------------------------------------------
# NTS benchmark


@dataclass(frozen=True)
class NtsBenchmarkConfig:
    """Repeated seeded teacher/student runs on freshly corrupted data."""

    dataset_kind: str
    noise: TransitionMatrix
    m: int
    train: TrainConfig
    repeats: int = 10
    noise_sigma: float = 0.1
    val_fraction: float = 0.2
    test_size: int = 10000
    base_seed: int = 0
    workers: int | None = None

    def to_json_dict(self) -> dict:
        return {
            "dataset_kind": self.dataset_kind,
            "noise": {"k": self.noise.k, "rows": self.noise.rows.tolist()},
            "m": self.m,
            "train": self.train.to_json_dict(),
            "repeats": self.repeats,
            "noise_sigma": self.noise_sigma,
            "val_fraction": self.val_fraction,
            "test_size": self.test_size,
            "base_seed": self.base_seed,
            "workers": self.workers,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "NtsBenchmarkConfig":
        return cls(
            dataset_kind=doc["dataset_kind"],
            noise=TransitionMatrix(doc["noise"]["rows"]),
            m=int(doc["m"]),
            train=TrainConfig.from_json_dict(doc.get("train", {})),
            repeats=doc.get("repeats", 10),
            noise_sigma=doc.get("noise_sigma", 0.1),
            val_fraction=doc.get("val_fraction", 0.2),
            test_size=doc.get("test_size", 10000),
            base_seed=doc.get("base_seed", 0),
            workers=doc.get("workers"),
        )


def _run_nts_task(payload: dict) -> dict:
    cfg = NtsBenchmarkConfig.from_json_dict(payload["config"])
    repeat = payload["repeat"]
    seed = derive_seed(cfg.base_seed, "nts", cfg.m, repeat)
    clean = make_dataset(cfg.dataset_kind, cfg.m, cfg.noise_sigma, derive_seed(seed, "data"))
    noisy = clean.with_labels(corrupt_labels(clean.labels, cfg.noise, derive_seed(seed, "noise")))
    train_ds, val_ds = split(noisy, cfg.val_fraction, derive_seed(seed, "split"))
    test = make_dataset(cfg.dataset_kind, cfg.test_size, cfg.noise_sigma, derive_seed(cfg.base_seed, "clean-test"))
    report = run_nts(train_ds, val_ds, cfg.train.with_seed(derive_seed(seed, "train")), clean_test=test)
    return {
        "repeat": repeat,
        "nt_step": report.nt_step,
        "ns_step": report.ns_step,
        "last_epoch_acc": report.last_epoch_acc,
        "nt_acc": report.nt_acc,
        "ns_acc": report.ns_acc,
    }


def run_nts_benchmark(cfg: NtsBenchmarkConfig) -> dict:
    """Run the teacher/student pipeline over seeded repeats and summarize
    the clean-test accuracies of Last / NT / NS."""
    payloads = [{"config": cfg.to_json_dict(), "repeat": r} for r in range(cfg.repeats)]
    runs = _pool_map(_run_nts_task, payloads, cfg.workers)
    runs = sorted(runs, key=lambda r: r["repeat"])
    return {
        "config": cfg.to_json_dict(),
        "runs": runs,
        "medians": {
            "last_epoch_acc": float(np.median([r["last_epoch_acc"] for r in runs])),
            "nt_acc": float(np.median([r["nt_acc"] for r in runs])),
            "ns_acc": float(np.median([r["ns_acc"] for r in runs])),
        },
    }


# ---------------------------------------------------------------------------
# report emission

_CELL_FIELDS = ["m", "repeat", "final_train_acc", "final_test_acc"]
_AGG_FIELDS = ["mean_train_acc", "std_train_acc", "mean_test_acc", "std_test_acc"]


def _sweep_header(k: int) -> list[str]:
    conf = [f"conf_{i}{j}" for i in range(k) for j in range(k)]
    return _CELL_FIELDS + conf + ["failed"] + _AGG_FIELDS


def sweep_to_csv(result: SweepResult) -> str:
    """Per-cell rows followed by per-size aggregate rows (repeat = -1).

    Aggregate rows leave the per-cell columns empty and fill the mean_/std_
    columns, computed over non-failed cells; the comment line restates
    this so the file is self-describing.
    """
    lines = [
        "# per-cell rows fill columns through `failed`; aggregate rows use repeat=-1 "
        "and fill the mean_/std_ columns (over non-failed cells); conf_ij is the "
        "clean-test confusion row i column j"
    ]
    lines.append(",".join(_sweep_header(result.k)))
    n_conf = result.k * result.k
    for c in result.cells:
        row = [str(c.m), str(c.repeat), repr(c.final_train_acc), repr(c.final_test_acc)]
        row += [repr(v) for v in c.confusion]
        row += ["1" if c.failed else "0"]
        row += [""] * len(_AGG_FIELDS)
        lines.append(",".join(row))
    for a in result.aggregates:
        row = [str(a.m), "-1", "", ""]
        row += [""] * n_conf
        row += [""]
        row += [repr(a.mean_train_acc), repr(a.std_train_acc), repr(a.mean_test_acc), repr(a.std_test_acc)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def sweep_from_csv(text: str) -> SweepResult:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    n_conf = sum(1 for h in header if h.startswith("conf_"))
    k = int(round(math.sqrt(n_conf)))
    cells = []
    for ln in lines[1:]:
        parts = ln.split(",")
        m, repeat = int(parts[0]), int(parts[1])
        if repeat == -1:
            continue
        cells.append(
            SweepCell(
                m=m,
                repeat=repeat,
                final_train_acc=float(parts[2]),
                final_test_acc=float(parts[3]),
                confusion=tuple(float(v) for v in parts[4 : 4 + n_conf]),
                failed=parts[4 + n_conf] == "1",
            )
        )
    cells = sorted(cells, key=lambda c: (c.m, c.repeat))
    return SweepResult(k=k, cells=tuple(cells), aggregates=tuple(_aggregate(cells)))


def sweep_to_json_dict(result: SweepResult) -> dict:
    return {
        "k": result.k,
        "cells": [
            {
                "m": c.m,
                "repeat": c.repeat,
                "final_train_acc": c.final_train_acc,
                "final_test_acc": c.final_test_acc,
                "confusion": list(c.confusion),
                "failed": c.failed,
                "error": c.error,
            }
            for c in result.cells
        ],
        "aggregates": [
            {
                "m": a.m,
                "n_cells": a.n_cells,
                "n_failed": a.n_failed,
                "mean_train_acc": a.mean_train_acc,
                "std_train_acc": a.std_train_acc,
                "mean_test_acc": a.mean_test_acc,
                "std_test_acc": a.std_test_acc,
            }
            for a in result.aggregates
        ],
    }


def _svg_path(points: list[tuple[float, float]]) -> str:
    return " ".join(f"{'M' if i == 0 else 'L'}{x:.2f},{y:.2f}" for i, (x, y) in enumerate(points))


def sweep_to_svg(result: SweepResult) -> str:
    """Line chart of mean train/test accuracy vs training size (log x) with
    one-standard-deviation bands."""
    width, height, pad = 640, 400, 55
    aggs = [a for a in result.aggregates if not math.isnan(a.mean_train_acc)]
    if not aggs:
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
            "<text x='20' y='30'>no data</text></svg>\n"
        )
    log_m = [math.log10(a.m) for a in aggs]
    lo, hi = min(log_m), max(log_m)
    span = (hi - lo) or 1.0

    def sx(m):
        return pad + (math.log10(m) - lo) / span * (width - 2 * pad)

    def sy(acc):
        return height - pad - max(0.0, min(1.0, acc)) * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = sy(frac)
        parts.append(f'<line x1="{pad - 4}" y1="{y:.2f}" x2="{pad}" y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{pad - 8}" y="{y + 4:.2f}" text-anchor="end">{frac}</text>')
    for a in aggs:
        x = sx(a.m)
        parts.append(f'<line x1="{x:.2f}" y1="{height - pad}" x2="{x:.2f}" y2="{height - pad + 4}" stroke="black"/>')
        parts.append(f'<text x="{x:.2f}" y="{height - pad + 18}" text-anchor="middle">{a.m}</text>')
    for series, color in (("train", "#d62728"), ("test", "#1f77b4")):
        mean = [getattr(a, f"mean_{series}_acc") for a in aggs]
        std = [getattr(a, f"std_{series}_acc") for a in aggs]
        band = [(sx(a.m), sy(mu + sd)) for a, mu, sd in zip(aggs, mean, std)]
        band += [(sx(a.m), sy(mu - sd)) for a, mu, sd in zip(reversed(aggs), reversed(mean), reversed(std))]
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in band)
        parts.append(f'<polygon points="{pts}" fill="{color}" opacity="0.2"/>')
        parts.append(
            f'<path d="{_svg_path([(sx(a.m), sy(mu)) for a, mu in zip(aggs, mean)])}" '
            f'fill="none" stroke="{color}" stroke-width="2"/>'
        )
    parts.append(f'<text x="{pad}" y="{pad - 12}" fill="#d62728">train accuracy</text>')
    parts.append(f'<text x="{pad + 130}" y="{pad - 12}" fill="#1f77b4">clean test accuracy</text>')
    parts.append(f'<text x="{width / 2:.0f}" y="{height - 8}" text-anchor="middle">training samples (log scale)</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_report(result, fmt: str, path) -> None:
    """Write a sweep result (csv / json / svg) or any JSON-serializable
    report dict (json) to ``path``."""
    if isinstance(result, SweepResult):
        if fmt == "csv":
            payload = sweep_to_csv(result)
        elif fmt == "json":
            payload = json.dumps(sweep_to_json_dict(result), sort_keys=True, indent=2) + "\n"
        elif fmt == "svg":
            payload = sweep_to_svg(result)
        else:
            raise ValueError(f"unknown sweep report format {fmt!r}")
    else:
        if fmt != "json":
            raise ValueError(f"dict reports only support json, got {fmt!r}")
        payload = json.dumps(result, sort_keys=True, indent=2) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(payload)
