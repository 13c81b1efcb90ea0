"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``.  The two statistical
criteria (regime sweep, teacher/student benchmark) train many networks and
dominate the runtime; their protocols are pinned in configs/.
"""

import json
import time
from contextlib import contextmanager
from pathlib import Path

import mpmath
import numpy as np
import pytest
from scipy import stats as scipy_stats

from nll.bounds import (
    BoundParams,
    audit_validation_bound,
    generalization_gap_bound,
    max_noisy_accuracy,
    noisy_accuracy,
    validation_gap_bound,
)
from nll.classify import label_confusion
from nll.cli import main as cli_main
from nll.data import sample_iid
from nll.experiments import (
    NtsBenchmarkConfig,
    SweepConfig,
    measured_worst_generalization_gap,
    merge_sweep_results,
    run_nts_benchmark,
    run_regime_sweep,
)
from nll.noise import uniform_noise
from nll.oracle import enumerate_best, exact_confusion, exact_noisy_accuracy, true_labeling

from test_mlp import gradient_check

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@contextmanager
def criterion(num: int, name: str):
    start = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {num:02d} {name}: FAIL ({time.perf_counter() - start:.1f}s)")
        raise
    print(f"\nACCEPTANCE {num:02d} {name}: PASS ({time.perf_counter() - start:.1f}s)")


# ---------------------------------------------------------------------------
# 1. robustness of the accuracy metric, certified by exhaustive enumeration


def test_criterion_01_enumeration_ceiling(world):
    with criterion(1, "noisy-accuracy ceiling by enumeration"):
        start = time.perf_counter()
        prior = world.class_prior()
        for rate in np.arange(0.05, 0.451, 0.05):
            t = uniform_noise(2, float(rate))
            h, value, unique = enumerate_best(world, "noisy", t=t)
            assert abs(value - (1.0 - rate)) <= 1e-12
            assert abs(value - max_noisy_accuracy(t, prior)) <= 1e-12
            assert unique
            assert np.array_equal(h.assignment, world.true_labels)
        assert time.perf_counter() - start < 1.0


# ---------------------------------------------------------------------------
# 2. the conditional-independence factorization of noisy accuracy


def test_criterion_02_decomposition_equivalence(world, t_quarter):
    with criterion(2, "noisy-accuracy decomposition over all 256 classifiers"):
        start = time.perf_counter()
        prior = world.class_prior()
        from test_oracle import all_assignments

        for h in all_assignments(world):
            direct = exact_noisy_accuracy(h, world, t_quarter)
            factored = noisy_accuracy(exact_confusion(h, world), t_quarter, prior)
            assert abs(direct - factored) <= 1e-12
        assert time.perf_counter() - start < 1.0


# ---------------------------------------------------------------------------
# 3. gap identity and convergence rate on random instances


def _random_instances(rng, k, n):
    c = rng.gamma(1.0, size=(n, k, k)) + 1e-12
    c /= c.sum(axis=2, keepdims=True)

    diag = rng.uniform(1.0 / k + 0.02, 0.98, size=(n, k))
    off = rng.gamma(1.0, size=(n, k, k - 1)) + 1e-9
    off = off / off.sum(axis=2, keepdims=True) * (1.0 - diag)[..., None]
    while True:
        bad = off.max(axis=2) >= diag - 1e-6
        if not bad.any():
            break
        nb = int(bad.sum())
        diag[bad] = rng.uniform(1.0 / k + 0.02, 0.98, size=nb)
        fresh = rng.gamma(1.0, size=(nb, k - 1)) + 1e-9
        off[bad] = fresh / fresh.sum(axis=1, keepdims=True) * (1.0 - diag[bad])[:, None]
    t = np.zeros((n, k, k))
    for i in range(k):
        cols = [j for j in range(k) if j != i]
        t[:, i, cols] = off[:, i, :]
        t[:, i, i] = diag[:, i]

    p = rng.gamma(1.0, size=(n, k)) + 0.05
    p /= p.sum(axis=1, keepdims=True)
    return c, t, p


def test_criterion_03_gap_identity_and_rate():
    with criterion(3, "gap identity + convergence rate on 10^4 random instances"):
        start = time.perf_counter()
        rng = np.random.default_rng(20240803)
        idx_cache = {}
        for k, n in ((2, 2500), (3, 2500), (4, 2500), (5, 2500)):
            c, t, p = _random_instances(rng, k, n)
            idx = idx_cache.setdefault(k, np.arange(k))
            diag_c = c[:, idx, idx]
            diag_t = t[:, idx, idx]
            clean = (p * diag_c).sum(axis=1)
            noisy = np.einsum("ni,nij,nij->n", p, t, c)
            ceiling = (p * diag_t).sum(axis=1)
            diff = diag_t[:, :, None] - t
            diff[:, idx, idx] = 0.0
            off_c = c.copy()
            off_c[:, idx, idx] = 0.0
            gap = np.einsum("ni,nij,nij->n", p, diff, off_c)
            off_max = np.where(np.eye(k, dtype=bool), -np.inf, t).max(axis=2)
            margin = (diag_t - off_max).min(axis=1)

            assert np.max(np.abs((ceiling - noisy) - gap)) <= 1e-12
            assert np.all(1.0 - clean <= gap / margin + 1e-12)
            assert np.all(noisy <= ceiling + 1e-12)
        assert time.perf_counter() - start < 5.0


# ---------------------------------------------------------------------------
# 4. validation bound value and Monte-Carlo audit


def test_criterion_04_validation_bound(world, t_quarter):
    with criterion(4, "validation bound 0.048 + Monte-Carlo audit"):
        start = time.perf_counter()
        bound = validation_gap_bound(1000, 0.01)
        assert abs(bound - 0.0480) <= 5e-4
        freq = audit_validation_bound(
            true_labeling(world), world, t_quarter, n=1000, delta=0.01, trials=10**4, seed=20240804
        )
        assert freq <= 0.013
        assert time.perf_counter() - start < 30.0


# ---------------------------------------------------------------------------
# 5. VC bound against arbitrary-precision arithmetic and a measured gap


def test_criterion_05_vc_bound(world, t_quarter):
    with criterion(5, "VC bound vs arbitrary precision + measured worst gap"):
        start = time.perf_counter()
        mpmath.mp.dps = 60
        grid = [(m, d, delta) for m in (100, 1000, 10**4, 10**5, 10**6) for d in (2.0, 8.0) for delta in (0.05, 0.5)]
        assert len(grid) == 20
        for m, d, delta in grid:
            fast = generalization_gap_bound(BoundParams(d_vc=d, delta=delta, m=m))
            mm, md, mdelta = mpmath.mpf(m), mpmath.mpf(d), mpmath.mpf(delta)
            reference = mpmath.sqrt(8 * (md * (mpmath.log(2 * mm / md) + 1) + mpmath.log(4 / mdelta)) / mm)
            assert abs(fast - float(reference)) <= 1e-10

        m_meas = 10**5
        worst = measured_worst_generalization_gap(world, t_quarter, m=m_meas, seed=20240805)
        bound = generalization_gap_bound(BoundParams(d_vc=world.size, delta=0.05, m=m_meas))
        assert worst <= bound
        assert time.perf_counter() - start < 120.0


# ---------------------------------------------------------------------------
# 6. regime reproduction (statistical, desk scale)


@pytest.fixture(scope="module")
def regime_sweep():
    doc = json.loads((CONFIG_DIR / "acceptance_sweep.json").read_text())
    start = time.perf_counter()
    results = [run_regime_sweep(SweepConfig.from_json_dict(stage)) for stage in doc["stages"]]
    merged = merge_sweep_results(results)
    return merged, time.perf_counter() - start, doc["thresholds"]


@pytest.mark.slow
def test_criterion_06_regime_reproduction(regime_sweep):
    with criterion(6, "three-regime reproduction on moons"):
        result, elapsed, thresholds = regime_sweep
        by_m = {a.m: a for a in result.aggregates}
        for agg in result.aggregates:
            print(
                f"  m={agg.m:>6d}: train {agg.mean_train_acc:.4f} +- {agg.std_train_acc:.4f}  "
                f"test {agg.mean_test_acc:.4f} +- {agg.std_test_acc:.4f}  (failed {agg.n_failed})"
            )
        assert all(a.n_failed == 0 for a in result.aggregates)

        mid = by_m[thresholds["intermediate_m"]]
        assert mid.mean_train_acc >= thresholds["intermediate_train_acc_min"]
        lo, hi = thresholds["intermediate_test_acc_range"]
        assert lo <= mid.mean_test_acc <= hi

        big = by_m[thresholds["large_m"]]
        lo, hi = thresholds["large_train_acc_range"]
        assert lo <= big.mean_train_acc <= hi
        assert big.mean_test_acc >= thresholds["large_test_acc_min"]

        sizes = [a.m for a in result.aggregates]
        means = [a.mean_test_acc for a in result.aggregates]
        rho = float(scipy_stats.spearmanr(sizes, means).statistic)
        print(f"  spearman(m, mean test acc) = {rho:.3f}, wall time {elapsed / 60:.1f} min")
        assert rho >= thresholds["spearman_min"]
        assert elapsed < 1800.0


@pytest.mark.slow
def test_small_sample_variance_dominates(regime_sweep):
    # the tiny-m regime is high variance: test-accuracy spread across
    # repeats dwarfs the large-m spread
    result, _, thresholds = regime_sweep
    by_m = {a.m: a for a in result.aggregates}
    small = by_m[thresholds["small_m"]]
    large = by_m[thresholds["large_m"]]
    assert small.std_test_acc >= thresholds["variance_ratio_min"] * large.std_test_acc


# ---------------------------------------------------------------------------
# 7. memorization confusion matches the noise process


def test_criterion_07_memorization_confusion(world, t_quarter):
    with criterion(7, "memorizing-classifier confusion equals T"):
        start = time.perf_counter()
        sample = sample_iid(world, 10**5, t_quarter, seed=20240806)
        idx = world.point_index(sample.features)
        true = world.true_labels[idx]
        # a classifier that fits every training sample predicts exactly the
        # noisy labels on its training inputs
        c = label_confusion(sample.labels, true, world.k)
        assert np.max(np.abs(c.rows - t_quarter.rows)) <= 0.01
        assert time.perf_counter() - start < 10.0


# ---------------------------------------------------------------------------
# 8. noisy-validation selection helps (teacher/student direction of effect)


@pytest.mark.slow
def test_criterion_08_nts_benchmark():
    with criterion(8, "teacher/student benchmark on noisy moons"):
        start = time.perf_counter()
        doc = json.loads((CONFIG_DIR / "acceptance_nts.json").read_text())
        cfg = NtsBenchmarkConfig.from_json_dict(doc["benchmark"])
        report = run_nts_benchmark(cfg)
        med = report["medians"]
        for run in report["runs"]:
            print(
                f"  repeat {run['repeat']}: last {run['last_epoch_acc']:.4f}  nt {run['nt_acc']:.4f} "
                f"(step {run['nt_step']})  ns {run['ns_acc']:.4f} (step {run['ns_step']})"
            )
        print(f"  medians: last {med['last_epoch_acc']:.4f}  nt {med['nt_acc']:.4f}  ns {med['ns_acc']:.4f}")
        assert med["last_epoch_acc"] <= med["nt_acc"]
        assert med["ns_acc"] >= med["nt_acc"] - doc["thresholds"]["ns_vs_nt_slack"]
        elapsed = time.perf_counter() - start
        assert elapsed < 1200.0


# ---------------------------------------------------------------------------
# 9. backpropagation against central finite differences


def test_criterion_09_gradient_check():
    with criterion(9, "backprop vs finite differences on 20 configurations"):
        start = time.perf_counter()
        rng = np.random.default_rng(20240807)
        for trial in range(20):
            d, k = int(rng.integers(2, 5)), int(rng.integers(2, 5))
            hidden = tuple(int(rng.integers(3, 9)) for _ in range(int(rng.integers(1, 3))))
            m = int(rng.integers(4, 20))
            rel = gradient_check((d, *hidden, k), m, seed=1000 + trial)
            assert rel <= 1e-4, f"config {trial}: relative error {rel}"
        assert time.perf_counter() - start < 10.0


# ---------------------------------------------------------------------------
# 10. CLI determinism


def test_criterion_10_cli_determinism(tmp_path):
    with criterion(10, "byte-identical CLI outputs on rerun"):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"max_steps": 120, "checkpoint_every": 40}))
        sweep_cfg = tmp_path / "sweep.json"
        sweep_cfg.write_text(
            json.dumps(
                {
                    "dataset_kind": "moons",
                    "noise": {"k": 2, "rows": [[0.75, 0.25], [0.25, 0.75]]},
                    "sizes": [8, 16],
                    "train": {"max_steps": 80, "checkpoint_every": 40},
                    "repeats": 2,
                    "test_size": 200,
                    "base_seed": 3,
                    "workers": 1,
                }
            )
        )

        def run_all(out: Path):
            out.mkdir()
            rc = 0
            rc |= cli_main(["noise", "make", "--kind", "uniform", "--k", "2", "--rate", "0.25", "--out", str(out / "noise.json")])
            rc |= cli_main(["data", "world", "--out", str(out / "world.json")])
            rc |= cli_main(["data", "make", "--kind", "moons", "--m", "40", "--sigma", "0.1", "--seed", "2", "--out", str(out / "d.csv")])
            rc |= cli_main(["data", "corrupt", "--noise", str(out / "noise.json"), "--seed", "3", "--in", str(out / "d.csv"), "--out", str(out / "n.csv")])
            rc |= cli_main(["data", "split", "--val-frac", "0.25", "--seed", "4", "--in", str(out / "n.csv"), "--train-out", str(out / "tr.csv"), "--val-out", str(out / "va.csv")])
            rc |= cli_main(["train", "--data", str(out / "tr.csv"), "--val", str(out / "va.csv"), "--config", str(cfg), "--out", str(out / "model.json"), "--checkpoints", str(out / "ckpt.csv")])
            rc |= cli_main(["bounds", "gen", "--m", "100000", "--dvc", "8", "--delta", "0.05", "--out", str(out / "gen.json")])
            rc |= cli_main(["bounds", "val", "--n", "1000", "--delta", "0.01", "--out", str(out / "val.json")])
            rc |= cli_main(["oracle", "best", "--world", str(out / "world.json"), "--noise", str(out / "noise.json"), "--out", str(out / "best.json")])
            rc |= cli_main(["bounds", "audit", "--model", str(out / "best.json"), "--world", str(out / "world.json"), "--noise", str(out / "noise.json"), "--n", "200", "--delta", "0.05", "--trials", "200", "--seed", "5", "--out", str(out / "audit.json")])
            rc |= cli_main(["nts", "--train", str(out / "tr.csv"), "--val", str(out / "va.csv"), "--config", str(cfg), "--report", str(out / "nts.json")])
            rc |= cli_main(["sweep", "--config", str(sweep_cfg), "--out", str(out / "sweep")])
            rc |= cli_main(["demo", "tabular", "--seed", "6", "--out", str(out / "demo")])
            assert rc == 0

        first, second = tmp_path / "first", tmp_path / "second"
        run_all(first)
        run_all(second)
        files = sorted(p.relative_to(first) for p in first.rglob("*") if p.is_file())
        assert files
        for rel in files:
            assert (first / rel).read_bytes() == (second / rel).read_bytes(), f"{rel} not deterministic"
