"""Command-line behavior: exit codes, shipped recipes, replay round trip."""

import numpy as np
import pytest

from lmimo.errors import ValidationError
from lmimo.experiments.cli import (
    EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, main, resolve_recipe, shipped_recipes,
)
from lmimo.experiments.config import load_config
from lmimo.experiments.runner import read_metrics_csv
from lmimo.modulo_adc import ModuloConfig, FoldedFrame, fold_frame, frame_from_csv, frame_to_csv

TINY_RECIPE = """\
recipe = "tiny"
kind = "single-carrier"
seed = 5
trials = 2

[scenario]
n_users = 1
n_antennas = 2
detector = "mrc"

[waveform]
constellation = 16
n_symbols = 24
oversampling = 18
rolloff = 0.25
span = 8

[adc]
zeta = 0.1
bits = 8

[sweep]
axis = "adc.bits"
values = [8]
"""


def _tiny(tmp_path):
    p = tmp_path / "tiny.toml"
    p.write_text(TINY_RECIPE)
    return str(p)


def test_shipped_recipe_set():
    assert shipped_recipes() == [
        "constellation", "eye", "power-scaling", "recovery-noisy",
        "recovery-ofdm", "recovery-qam", "sqnr-vs-b",
        "sumrate-and-ee-vs-b", "sumrate-vs-antennas",
    ]


def test_resolve_recipe():
    path = resolve_recipe("eye")
    assert path.endswith("eye.toml")
    assert resolve_recipe("/tmp/x.toml") == "/tmp/x.toml"
    with pytest.raises(ValidationError):
        resolve_recipe("does-not-exist")


def test_all_shipped_recipes_validate():
    for name in shipped_recipes():
        assert main(["validate", name]) == EXIT_OK


def test_validate_reports_diagnostics(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text('recipe = "bad"\nkind = "wavelet"\n')
    assert main(["validate", str(p)]) == EXIT_INVALID
    out = capsys.readouterr().out
    assert "invalid:" in out and "kind" in out


def test_unknown_recipe_is_invalid(capsys):
    assert main(["run", "no-such-recipe", "--out", "/tmp/unused"]) == EXIT_INVALID


def test_list_recipes(capsys):
    assert main(["list-recipes"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == len(shipped_recipes())
    assert lines[0].startswith("constellation")


def test_run_is_deterministic(tmp_path, capsys):
    recipe = _tiny(tmp_path)
    assert main(["run", recipe, "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["run", recipe, "--out", str(tmp_path / "b")]) == EXIT_OK
    a = (tmp_path / "a" / "metrics.csv").read_bytes()
    b = (tmp_path / "b" / "metrics.csv").read_bytes()
    assert a == b
    assert main(["run", recipe, "--out", str(tmp_path / "c"),
                 "--jobs", "2"]) == EXIT_OK
    assert (tmp_path / "c" / "metrics.csv").read_bytes() == a


def test_run_flag_overrides(tmp_path):
    recipe = _tiny(tmp_path)
    assert main(["run", recipe, "--out", str(tmp_path / "o"),
                 "--seed", "9", "--trials", "1", "--raw"]) == EXIT_OK
    rows, meta = read_metrics_csv(tmp_path / "o" / "metrics.csv")
    assert "seed=9" in meta
    assert rows[0]["trials"] == "1"
    raw, _ = read_metrics_csv(tmp_path / "o" / "raw.csv")
    assert len(raw) == 1


def test_replay_round_trip(tmp_path, capsys):
    rng = np.random.default_rng(21)
    w = rng.uniform(-3.0, 3.0, 10)
    c = rng.standard_normal(10) + 1j * rng.standard_normal(10)
    t = np.arange(2000) * 0.05
    x = np.real(c @ np.exp(1j * np.outer(w, t)))
    x = 30.0 * x / np.max(np.abs(x)) + 0j
    frame = fold_frame(x, ModuloConfig(1.5, 4), 0.05, 3.0, quantize=True)

    cap = tmp_path / "capture.csv"
    frame_to_csv(frame, cap, str(cap) + ".json")
    ref = tmp_path / "truth.csv"
    truth = FoldedFrame(samples=x, config=frame.config, sample_interval=0.05,
                        bandwidth=3.0, beta=frame.beta)
    frame_to_csv(truth, ref, str(ref) + ".json")

    out = tmp_path / "rep"
    assert main(["replay", str(cap), "--out", str(out),
                 "--reference", str(ref)]) == EXIT_OK
    rows, _ = read_metrics_csv(out / "metrics.csv")
    assert len(rows) == 1
    bound = np.sqrt(2.0) * frame.config.step / 2.0 * (1 + 1e-9)
    assert float(rows[0]["residual"]) <= bound
    rec = frame_from_csv(out / "recovered-capture.csv",
                         str(out / "recovered-capture.csv") + ".json")
    assert np.max(np.abs(rec.samples - x)) <= bound


def test_replay_missing_capture_is_runtime_error(tmp_path):
    assert main(["replay", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "o")]) == EXIT_RUNTIME


def test_shipped_recipes_parse_and_carry_unique_seeds():
    seeds = {}
    for name in shipped_recipes():
        cfg = load_config(resolve_recipe(name))
        assert cfg.recipe == name
        seeds.setdefault(cfg.seed, []).append(name)
    clashes = {s: names for s, names in seeds.items() if len(names) > 1}
    assert not clashes
