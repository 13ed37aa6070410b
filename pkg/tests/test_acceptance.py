"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one PASS line on success; `pytest -v` additionally gives
the per-criterion pass/fail verdict. The end-to-end criterion (07) is the
long pole and runs the full CLI path: cohort generation, four variant
evaluations, comparison, and a byte-reproducibility recheck.
"""

import hashlib
import json
import time

import numba
import numpy as np
import pytest

from msrocket.classifier import fit_ridge
from msrocket.cli import main
from msrocket.config import RunConfig
from msrocket.decompose import high_pass, moving_average
from msrocket.evaluate import (
    ConfusionCounts,
    leave_one_out,
    mcc,
    wilcoxon_signed_rank,
)
from msrocket.kernels import Kernel, generate_kernels, sample_scale
from msrocket.synth import SynthConfig, generate_cohort
from msrocket.transform import transform_dataset
from msrocket.variants import Variant

from oracles import (
    mcc_pearson,
    ridge_primal_pinv,
    scale_cdf_analytic,
    variant_features_naive,
    wilcoxon_exact_enum,
)

RNG_SEED = 63120


def _announce(number, message):
    print(f"ACCEPTANCE CRITERION {number:02d} PASS: {message}")


def test_criterion_01_reconstruction():
    rng = np.random.default_rng(RNG_SEED)
    start = time.perf_counter()
    for _ in range(1000):
        x = rng.standard_normal(128)
        for s in range(1, 19):
            low = moving_average(x, s)
            high = high_pass(x, low)
            tol = np.spacing(
                np.max(np.abs(np.stack([x, low, high])), axis=0)
            )
            assert np.all(np.abs((low + high) - x) <= tol), s
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"reconstruction sweep took {elapsed:.1f}s"
    _announce(1, f"1000 epochs x scales 1..18 reconstruct within 1 ULP "
                 f"in {elapsed:.1f}s")


def test_criterion_02_convolution_oracle():
    rng = np.random.default_rng(RNG_SEED + 1)
    variants = list(Variant)
    start = time.perf_counter()
    checked = 0
    for _ in range(1000):
        epoch = rng.standard_normal(128)
        length = int(rng.choice([7, 9, 11]))
        weights = rng.standard_normal(length)
        weights -= weights.mean()
        scale = sample_scale(128, length, rng)
        kernel = Kernel(
            length=length, weights=weights,
            bias=float(rng.uniform(-1, 1)), scale=scale,
            use_high_freq=bool(rng.integers(0, 2)),
        )
        variant = variants[rng.integers(0, 4)]
        kset = generate_kernels(0, 128, 0, variant)
        kset.kernels.append(kernel)
        row = transform_dataset(epoch[None, :], kset, variant).values[0]
        want = variant_features_naive(epoch, kernel, variant.value)
        assert np.isclose(row[0], want[0], rtol=1e-10, atol=1e-12)
        assert np.isclose(row[1], want[1], rtol=1e-10, atol=1e-12)
        checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, f"oracle sweep took {elapsed:.1f}s"
    _announce(2, f"{checked} random (epoch, kernel, variant) triples match "
                 f"the naive nested-loop oracle to 1e-10 in {elapsed:.1f}s")


def test_criterion_03_scale_sampler():
    n_draws = 1_000_000
    for m in (7, 9, 11):
        rng = np.random.default_rng(RNG_SEED + m)
        bound = 128 // m
        draws = np.array(
            [sample_scale(128, m, rng) for _ in range(n_draws)],
            dtype=np.int64,
        )
        assert draws.min() >= 1
        assert draws.max() <= bound
        worst = 0.0
        for k in range(1, bound + 1):
            empirical = float(np.count_nonzero(draws <= k)) / n_draws
            worst = max(worst, abs(empirical - scale_cdf_analytic(bound, k)))
        assert worst <= 0.005, f"M={m}: CDF deviation {worst:.4f}"
    _announce(3, "3 x 1e6 scale draws respect [1, floor(128/M)] and match "
                 "the floor(2^U) CDF to 0.005")


def test_criterion_04_ridge_oracle():
    rng = np.random.default_rng(RNG_SEED + 2)
    for trial in range(50):
        n = int(rng.integers(5, 51))
        p = int(rng.integers(2, 501))
        X = rng.standard_normal((n, p))
        y = np.where(rng.random(n) > 0.5, 1.0, -1.0)
        y[0], y[1] = -1.0, 1.0
        model = fit_ridge(X, y, alpha=1.0)
        w_ref, b_ref, _, _ = ridge_primal_pinv(X, y, 1.0)
        rel = (np.linalg.norm(model.weights - w_ref)
               / max(np.linalg.norm(w_ref), 1e-300))
        assert rel <= 1e-8, f"trial {trial} ({n}x{p}): rel error {rel:.2e}"
        assert abs(model.intercept - b_ref) <= 1e-12
    _announce(4, "dual ridge matches the pseudo-inverse primal oracle to "
                 "1e-8 on 50 instances up to 50x500")


def test_criterion_05_mcc_oracle():
    rng = np.random.default_rng(RNG_SEED + 3)
    n_checked = 0
    for _ in range(200):
        tp, fp, tn, fn = (int(v) for v in rng.integers(0, 120, size=4))
        if tp + fp + tn + fn == 0:
            tp = 1
        got = mcc(ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn))
        want = mcc_pearson(tp, fp, tn, fn)
        assert abs(got - want) <= 1e-12
        n_checked += 1
    for degenerate in [(5, 0, 0, 0), (0, 5, 0, 0), (0, 0, 5, 0), (0, 0, 0, 5),
                       (3, 7, 0, 0), (0, 0, 4, 9)]:
        assert mcc(ConfusionCounts(*degenerate)) == 0.0
    _announce(5, f"{n_checked} random confusion matrices match the binary "
                 f"Pearson oracle to 1e-12; degenerate marginals return 0")


def test_criterion_06_wilcoxon_oracle():
    rng = np.random.default_rng(RNG_SEED + 4)
    # the canonical n=8 constant-shift case is exactly 2/256
    a = np.arange(8.0)
    assert wilcoxon_signed_rank(a, a - 1.0) == 0.0078125
    n_checked = 0
    for n in range(5, 13):
        for trial in range(8):
            a = rng.standard_normal(n)
            if trial % 2:
                a = np.round(a * 2) / 2  # force ties
            b = a - rng.standard_normal(n) * 0.8
            d = a - b
            if np.count_nonzero(d) < 5:
                continue
            got = wilcoxon_signed_rank(a, b)
            want = wilcoxon_exact_enum(a, b)
            assert abs(got - want) <= 1e-12, (n, trial)
            n_checked += 1
    _announce(6, f"exact signed-rank p matches full enumeration to 1e-12 "
                 f"on {n_checked} instances with n <= 12; "
                 f"n=8 one-sided shift gives exactly 0.0078125")


def test_criterion_08_variant_coincidence():
    rng = np.random.default_rng(RNG_SEED + 5)
    kset = generate_kernels(2000, 128, 17, Variant.MS_HLF)
    for kernel in kset:
        kernel.scale = 1
    epochs = rng.standard_normal((64, 128))
    digests = set()
    for variant in Variant:
        fm = transform_dataset(epochs, kset, variant)
        digests.add(hashlib.sha256(fm.values.tobytes()).hexdigest())
    assert len(digests) == 1
    _announce(8, "with every scale forced to 1, all four variants produce "
                 "hash-identical feature matrices")


def test_criterion_09_benchmark_structure(tmp_path, capsys):
    out = tmp_path / "bench"
    code = main(["bench", "--epochs", "1000", "--kernels", "10000",
                 "--repeats", "2", "--seed", "3", "--out", str(out)])
    assert code == 0
    shown = capsys.readouterr().out
    lines = (out / "bench.csv").read_text().splitlines()
    assert lines[0].startswith("variant,mean_s,sd_s")
    assert len(lines) == 5  # header + one row per variant
    tags = [line.split(",")[0] for line in lines[1:]]
    assert tags == [v.value for v in Variant]
    means = {line.split(",")[0]: float(line.split(",")[1])
             for line in lines[1:]}
    assert all(m > 0 for m in means.values())
    assert "mean (SD)" in shown
    assert "trend check" in shown  # dilation-vs-ms_hlf ordering is reported
    trend = ("holds" if means["ms_hlf_dilation"] < means["ms_hlf"]
             else "does not hold")
    with capsys.disabled():
        _announce(9, f"bench emits the four-row mean (SD) table at "
                     f"1000 epochs x 10000 kernels; dilation<ms_hlf trend "
                     f"{trend} on this machine "
                     f"({means['ms_hlf_dilation']:.2f}s vs "
                     f"{means['ms_hlf']:.2f}s)")


def test_criterion_10_parallel_determinism():
    rng = np.random.default_rng(RNG_SEED + 6)
    max_workers = numba.config.NUMBA_NUM_THREADS
    worker_counts = sorted({1, min(2, max_workers), max_workers})

    kset = generate_kernels(300, 128, 9, Variant.MS_HLF_DILATION)
    epochs = rng.standard_normal((48, 128))
    matrices = [
        transform_dataset(epochs, kset, Variant.MS_HLF_DILATION, workers=w)
        .values for w in worker_counts
    ]
    for other in matrices[1:]:
        assert np.array_equal(matrices[0], other)

    cohort = generate_cohort(SynthConfig(
        n_subjects=3, duration_s=20.0, burst_amp=8.0, interburst_amp=1.0,
        seed=5,
    ))
    reports = []
    for w in worker_counts:
        config = RunConfig(variant=Variant.MS_HLF, n_kernels=100, seed=2,
                           workers=w)
        reports.append(leave_one_out(cohort, config).to_json())
    assert all(r == reports[0] for r in reports)
    _announce(10, f"transform_dataset and leave_one_out are byte-identical "
                  f"for worker counts {worker_counts}")


@pytest.mark.slow
def test_criterion_07_end_to_end(tmp_path):
    start = time.perf_counter()
    cohort_dir = tmp_path / "cohort"
    synth_cfg = tmp_path / "synth.json"
    doc = SynthConfig(
        n_subjects=12, duration_s=60.0, burst_amp=5.0, interburst_amp=1.0,
        seed=2024,
    ).to_dict()
    synth_cfg.write_text(json.dumps(doc))
    assert main(["gen-data", "--config", str(synth_cfg),
                 "--out", str(cohort_dir)]) == 0

    run_dir = tmp_path / "runs"
    medians = {}
    for variant in Variant:
        code = main([
            "evaluate", "--cohort", str(cohort_dir),
            "--variant", variant.value, "--kernels", "10000",
            "--seed", "101", "--out", str(run_dir),
        ])
        assert code == 0
        report = json.loads(
            (run_dir / f"report_{variant.value}.json").read_text()
        )
        medians[variant.value] = report["summary"]["median"]
        assert report["summary"]["median"] > 0.7, variant

    compare_dir = tmp_path / "compare"
    report_paths = [str(run_dir / f"report_{v.value}.json") for v in Variant]
    assert main(["compare", *report_paths, "--out", str(compare_dir)]) == 0
    assert (compare_dir / "comparison.json").exists()

    # byte-reproducibility: one variant rerun end to end
    rerun_dir = tmp_path / "rerun"
    assert main([
        "evaluate", "--cohort", str(cohort_dir),
        "--variant", Variant.MS_HLF.value, "--kernels", "10000",
        "--seed", "101", "--out", str(rerun_dir),
    ]) == 0
    first = (run_dir / "report_ms_hlf.json").read_bytes()
    second = (rerun_dir / "report_ms_hlf.json").read_bytes()
    assert first == second

    elapsed = time.perf_counter() - start
    assert elapsed < 1800.0, f"end-to-end run took {elapsed:.0f}s"
    summary = ", ".join(f"{k}={v:.3f}" for k, v in medians.items())
    _announce(7, f"12-subject 5:1 cohort, 10000 kernels: median MCC {summary}; "
                 f"byte-reproducible rerun; total {elapsed:.0f}s")
