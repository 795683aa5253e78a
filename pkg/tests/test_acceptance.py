"""End-to-end acceptance checks, one test per shipped-figure criterion.

Each test prints a single pass/fail line (visible with -s or -rA) and
asserts the stated tolerance. Recipes are executed once per session and
shared across criteria.
"""

import subprocess
import sys
import time

import numpy as np
import pytest

from lmimo.experiments.cli import main as cli_main
from lmimo.experiments.cli import resolve_recipe
from lmimo.experiments.config import load_config
from lmimo.experiments.runner import execute, read_metrics_csv
from lmimo.modulo_adc import FoldedFrame, ModuloConfig, fold_frame, frame_to_csv
from lmimo.recovery import anchor_constant, recover

DB_PER_BIT = 20.0 * np.log10(2.0)


def _report(criterion, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] criterion {criterion}: {status} ({detail})")
    assert ok, f"criterion {criterion}: {detail}"


@pytest.fixture(scope="session")
def runs(tmp_path_factory):
    """Execute a shipped recipe once and cache (rows, elapsed seconds)."""
    cache = {}

    def get(name):
        if name not in cache:
            cfg = load_config(resolve_recipe(name))
            out = tmp_path_factory.mktemp(name.replace("-", "_"))
            t0 = time.perf_counter()
            execute(cfg, out)
            elapsed = time.perf_counter() - t0
            rows, _ = read_metrics_csv(out / "metrics.csv")
            cache[name] = (rows, elapsed)
        return cache[name]

    return get


def _bandlimited(rng, n=2000, t=0.05, omega=3.0):
    w = rng.uniform(-omega, omega, 12)
    c = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    x = np.real(c @ np.exp(1j * np.outer(w, np.arange(n) * t)))
    # zero-mean so the anchoring convention is unambiguous
    x -= x.mean()
    return rng.uniform(5.0, 60.0) * x / np.max(np.abs(x))


def test_c01_exact_unfolding():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        x = _bandlimited(rng) + 1j * _bandlimited(rng)
        frame = fold_frame(x, ModuloConfig(1.0, 12), 0.05, 3.0)
        rec = anchor_constant(recover(frame).samples, 1.0)
        worst = max(worst, float(np.max(np.abs(rec - x))) / frame.beta)
    elapsed = time.perf_counter() - t0
    _report(1, worst <= 1e-9 and elapsed < 10.0,
            f"max err {worst:.3e} of beta over 100 trials, {elapsed:.2f}s")


def test_c02_single_carrier_coarse_adc(runs):
    rows, elapsed = runs("recovery-qam")
    row = next(r for r in rows if r["bits"] == "2")
    mse, ber, ser = (float(row[k]) for k in ("mse", "ber", "ser"))
    ok = 1e-4 <= mse <= 1e-3 and ber <= 5e-3 and ser <= 3e-2 and elapsed < 60.0
    _report(2, ok, f"mse {mse:.3e}, ber {ber:.2e}, ser {ser:.2e}, {elapsed:.1f}s")


def test_c03_ofdm_coarse_adc(runs):
    rows, elapsed = runs("recovery-ofdm")
    row = next(r for r in rows if r["bits"] == "2")
    mse, ser = float(row["mse"]), float(row["ser"])
    ok = 1e-4 <= mse <= 3e-3 and ser <= 5e-2 and elapsed < 120.0
    _report(3, ok, f"mse {mse:.3e}, ser {ser:.2e}, {elapsed:.1f}s")


def test_c04_mse_vs_bits_monotone(runs):
    rows, _ = runs("recovery-qam")
    by_bits = {int(r["bits"]): float(r["mse"]) for r in rows}
    bits = sorted(by_bits)
    ok = (bits == list(range(2, 13))
          and all(by_bits[a] > by_bits[b] for a, b in zip(bits, bits[1:]))
          and by_bits[12] <= 1e-8)
    _report(4, ok, f"mse(2) {by_bits[2]:.3e} -> mse(12) {by_bits[12]:.3e}, "
                   f"strictly decreasing over b=2..12")


def test_c05_sqnr_figures(runs):
    rows, elapsed = runs("sqnr-vs-b")
    probs = []
    mod = {}
    for r in rows:
        b = int(r["bits"])
        z = float(r["zeta"])
        sqnr = float(r["sqnr_db"])
        if r["adc"] == "conventional":
            if r["source"] == "uniform":
                if abs(sqnr - DB_PER_BIT * b) > 0.5:
                    probs.append(f"uniform conv b={b}: {sqnr:.2f}")
            elif b >= 3 and abs(sqnr - (6.02 * b - 4.35)) > 1.0:
                probs.append(f"gaussian conv b={b}: {sqnr:.2f}")
        else:
            mod[(r["source"], b, z)] = sqnr
            if r["source"] == "uniform":
                want = DB_PER_BIT * b - 20.0 * np.log10(z)
                if abs(sqnr - want) > 0.5:
                    probs.append(f"uniform mod b={b} z={z}: {sqnr:.2f}")
    for (source, b, z), sqnr in mod.items():
        if z == 0.1:
            gain = mod[(source, b, 0.01)] - sqnr
            if not 19.0 <= gain <= 21.0:
                probs.append(f"{source} b={b} zeta gain {gain:.2f}")
    ok = not probs and elapsed < 60.0
    _report(5, ok, f"{len(rows)} points, worst cases: "
                   f"{probs[:3] if probs else 'none'}, {elapsed:.1f}s")


def _by_case(rows):
    out = {}
    for r in rows:
        out[(r["label"], int(r["n_antennas"]))] = r
    return out


def test_c06_mrc_closed_form_tracks_mc(runs):
    rows, elapsed = runs("sumrate-vs-antennas")
    cases = _by_case(rows)
    gaps = []
    for (label, n), r in cases.items():
        if r["detector"] != "mrc":
            continue
        mc, approx = float(r["sum_rate_mc"]), float(r["sum_rate_approx"])
        gaps.append((abs(approx - mc) / mc, label, n))
    worst = max(gaps)
    mod_ok = all(
        float(cases[("mrc-modulo-b2", n)]["sum_rate_mc"])
        >= 0.95 * float(cases[("mrc-ideal", n)]["sum_rate_mc"])
        for n in (50, 100, 200, 400))
    ok = worst[0] <= 0.05 and mod_ok and elapsed < 300.0
    _report(6, ok, f"worst mrc gap {worst[0] * 100:.2f}% ({worst[1]} N={worst[2]}), "
                   f"2-bit modulo within 5% of ideal, {elapsed:.1f}s")


def test_c07_power_scaling(runs):
    rows, _ = runs("power-scaling")
    cases = _by_case(rows)
    ideal = {n: float(cases[("mrc-ideal", n)]["sum_rate_mc"])
             for n in (50, 100, 200, 400)}
    flat = ideal[400] / ideal[100]
    one_bit_ok = all(
        float(cases[("mrc-modulo-b1", n)]["sum_rate_mc"]) >= 0.9 * ideal[n]
        for n in (50, 100, 200, 400))
    ok = flat <= 1.15 and one_bit_ok
    _report(7, ok, f"rate(400)/rate(100) = {flat:.4f} under 1/N power, "
                   f"one-bit modulo within 10% of ideal")


def test_c08_energy_efficiency_crossover(runs):
    rows, _ = runs("sumrate-and-ee-vs-b")
    xi = {}
    for r in rows:
        xi[(r["detector"], r["adc"], int(r["bits"]))] = float(r["xi"])
    probs = []
    for det in ("mrc", "zf"):
        for b in range(1, 7):
            if xi[(det, "modulo", b)] < xi[(det, "conventional", b)]:
                probs.append(f"{det} b={b}: modulo below conventional")
        for adc in ("modulo", "conventional"):
            series = [xi[(det, adc, b)] for b in range(3, 9)]
            if not all(a > b for a, b in zip(series, series[1:])):
                probs.append(f"{det} {adc}: not decreasing past b=3")
    _report(8, not probs, f"modulo >= conventional through b=6 and "
                          f"falling past b=3; issues: {probs if probs else 'none'}")


def test_c09_property_suites_fast():
    files = ["tests/test_kernels.py", "tests/test_modulo_adc.py",
             "tests/test_recovery.py", "tests/test_signal_chain.py",
             "tests/test_channel.py"]
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *files],
        capture_output=True, text=True)
    elapsed = time.perf_counter() - t0
    _report(9, proc.returncode == 0 and elapsed < 30.0,
            f"property + unit suites green in {elapsed:.1f}s")


def test_c10_replay_round_trip(tmp_path):
    rng = np.random.default_rng(77)
    x = (_bandlimited(rng) + 1j * _bandlimited(rng))
    frame = fold_frame(x, ModuloConfig(1.0, 6), 0.05, 3.0, quantize=True)
    cap = tmp_path / "capture.csv"
    frame_to_csv(frame, cap, str(cap) + ".json")
    ref = tmp_path / "truth.csv"
    frame_to_csv(FoldedFrame(samples=x, config=frame.config,
                             sample_interval=0.05, bandwidth=3.0,
                             beta=frame.beta), ref, str(ref) + ".json")
    code = cli_main(["replay", str(cap), "--out", str(tmp_path / "rep"),
                     "--reference", str(ref)])
    rows, _ = read_metrics_csv(tmp_path / "rep" / "metrics.csv")
    residual = float(rows[0]["residual"])
    bound = np.sqrt(2.0) * frame.config.step / 2.0 * (1 + 1e-9)
    _report(10, code == 0 and residual <= bound,
            f"replay residual {residual:.3e} <= quantizer cell bound {bound:.3e}")
