"""Declarative experiment configuration: loading, validation, hashing.

A config is one TOML document with a flat head (recipe, kind, seed,
trials) and per-concern sections. Exactly one sweep axis is declared as
a dotted section.key path; the runner rewrites that field for every
sweep value. Validation collects every violated field before reporting
so a bad file fails in one round trip.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace, asdict

try:
    import tomllib
except ImportError:                      # python 3.10
    import tomli as tomllib

from ..errors import ValidationError
from ..signal_chain import QAM_ORDERS

KINDS = ("single-carrier", "ofdm", "sqnr", "eye", "constellation",
         "rates", "replay")
DETECTORS = ("zf", "mrc")
ADC_KINDS = ("modulo", "conventional")


@dataclass(frozen=True)
class ExperimentConfig:
    recipe: str
    kind: str
    seed: int = 0
    trials: int = 1
    scenario: dict = field(default_factory=dict)
    waveform: dict = field(default_factory=dict)
    adc: dict = field(default_factory=dict)
    recovery: dict = field(default_factory=dict)
    noise: dict = field(default_factory=dict)
    ofdm: dict = field(default_factory=dict)
    rates: dict = field(default_factory=dict)
    sqnr: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    replay: dict = field(default_factory=dict)

    _SECTIONS = ("scenario", "waveform", "adc", "recovery", "noise",
                 "ofdm", "rates", "sqnr", "sweep", "output", "replay")

    def get(self, path, default=None):
        """Value at a dotted section.key path."""
        section, key = _split_path(path)
        return getattr(self, section).get(key, default)

    def with_override(self, path, value) -> "ExperimentConfig":
        """Copy of this config with one dotted path rewritten."""
        section, key = _split_path(path)
        updated = dict(getattr(self, section))
        updated[key] = value
        return replace(self, **{section: updated})

    @property
    def sweep_axis(self):
        return self.sweep.get("axis", "")

    @property
    def sweep_values(self):
        return list(self.sweep.get("values", []))

    def canonical_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        """Digest of everything that determines results; the output
        section only steers where files land, so it is excluded."""
        doc = asdict(self)
        doc.pop("output")
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _split_path(path):
    parts = str(path).split(".")
    if len(parts) != 2 or parts[0] not in ExperimentConfig._SECTIONS:
        raise ValidationError(
            f"sweep axis must be a section.key path into one of "
            f"{ExperimentConfig._SECTIONS}, got {path!r}")
    return parts[0], parts[1]


def load_config(path) -> ExperimentConfig:
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    return config_from_dict(doc, source=str(path))


def config_from_dict(doc, source="<dict>") -> ExperimentConfig:
    doc = dict(doc)
    known = {"recipe", "kind", "seed", "trials", *ExperimentConfig._SECTIONS}
    stray = sorted(set(doc) - known)
    if stray:
        raise ValidationError(
            [f"{source}: unknown top-level key {k!r}" for k in stray])
    head = {k: doc.pop(k) for k in ("recipe", "kind", "seed", "trials")
            if k in doc}
    sections = {k: dict(doc.get(k, {})) for k in ExperimentConfig._SECTIONS}
    try:
        return ExperimentConfig(**head, **sections)
    except TypeError as exc:
        raise ValidationError(f"{source}: {exc}") from exc


def validate(cfg: ExperimentConfig):
    """All diagnostics for a config; empty list means valid."""
    diags = []

    def need(cond, msg):
        if not cond:
            diags.append(msg)

    need(isinstance(cfg.recipe, str) and cfg.recipe, "recipe: must be a non-empty string")
    need(cfg.kind in KINDS, f"kind: must be one of {KINDS}, got {cfg.kind!r}")
    need(isinstance(cfg.seed, int) and cfg.seed >= 0, f"seed: must be a non-negative integer, got {cfg.seed!r}")
    need(isinstance(cfg.trials, int) and cfg.trials >= 1, f"trials: must be a positive integer, got {cfg.trials!r}")

    axis = cfg.sweep_axis
    values = cfg.sweep_values
    need(bool(axis), "sweep.axis: exactly one sweep axis is required")
    need(len(values) >= 1, "sweep.values: need at least one value")
    if axis:
        try:
            _split_path(axis)
        except ValidationError as exc:
            diags.extend(exc.diagnostics)

    if cfg.kind in ("single-carrier", "ofdm", "eye", "constellation"):
        order = cfg.waveform.get("constellation")
        need(order in QAM_ORDERS,
             f"waveform.constellation: must be one of {QAM_ORDERS}, got {order!r}")
        n_symbols = cfg.waveform.get("n_symbols", 0)
        if cfg.kind != "ofdm":
            need(isinstance(n_symbols, int) and n_symbols >= 16,
                 f"waveform.n_symbols: need at least 16, got {n_symbols!r}")
        of = cfg.waveform.get("oversampling", 0)
        need(isinstance(of, int) and of >= 18,
             f"waveform.oversampling: need an integer >= 18 for the recovery "
             f"condition, got {of!r}")
        rolloff = cfg.waveform.get("rolloff", -1.0)
        need(isinstance(rolloff, (int, float)) and 0.0 <= rolloff <= 1.0,
             f"waveform.rolloff: must lie in [0, 1], got {rolloff!r}")
        zeta = cfg.adc.get("zeta", 0.0)
        need(isinstance(zeta, (int, float)) and 0.0 < zeta <= 1.0,
             f"adc.zeta: must lie in (0, 1], got {zeta!r}")
        bits = cfg.adc.get("bits", 0)
        need(isinstance(bits, int) and 1 <= bits <= 24,
             f"adc.bits: must be an integer in [1, 24], got {bits!r}")

    if cfg.kind in ("single-carrier", "ofdm", "constellation"):
        if cfg.kind == "constellation":
            for case in DETECTORS:
                block = cfg.scenario.get(case)
                need(isinstance(block, dict) and
                     {"n_users", "n_antennas"} <= set(block or {}),
                     f"scenario.{case}: needs n_users and n_antennas")
        else:
            n_users = cfg.scenario.get("n_users", 0)
            n_ant = cfg.scenario.get("n_antennas", 0)
            need(isinstance(n_users, int) and n_users >= 1,
                 f"scenario.n_users: must be a positive integer, got {n_users!r}")
            need(isinstance(n_ant, int) and n_ant >= 1,
                 f"scenario.n_antennas: must be a positive integer, got {n_ant!r}")
            det = cfg.scenario.get("detector")
            need(det in DETECTORS,
                 f"scenario.detector: must be one of {DETECTORS}, got {det!r}")
            if det == "zf" and isinstance(n_users, int) and isinstance(n_ant, int):
                need(n_ant >= n_users,
                     "scenario.n_antennas: zero forcing needs at least as many "
                     "antennas as users")

    if cfg.kind == "ofdm":
        k_sub = cfg.ofdm.get("subcarriers", 0)
        n_cp = cfg.ofdm.get("cyclic_prefix", -1)
        taps = cfg.ofdm.get("taps", 0)
        n_blocks = cfg.ofdm.get("n_blocks", 0)
        need(isinstance(k_sub, int) and k_sub >= 2 and (k_sub & (k_sub - 1)) == 0,
             f"ofdm.subcarriers: must be a power of two >= 2, got {k_sub!r}")
        need(isinstance(n_cp, int) and 0 < n_cp < max(k_sub, 1),
             f"ofdm.cyclic_prefix: must lie in (0, subcarriers), got {n_cp!r}")
        need(isinstance(taps, int) and 1 <= taps <= max(n_cp, 1),
             f"ofdm.taps: must lie in [1, cyclic_prefix], got {taps!r}")
        need(isinstance(n_blocks, int) and n_blocks >= 1,
             f"ofdm.n_blocks: must be a positive integer, got {n_blocks!r}")

    if cfg.kind == "sqnr":
        n_samples = cfg.sqnr.get("samples", 0)
        need(isinstance(n_samples, int) and n_samples >= 1000,
             f"sqnr.samples: need at least 1000, got {n_samples!r}")
        sources = cfg.sqnr.get("sources", [])
        need(isinstance(sources, list) and sources and
             set(sources) <= {"uniform", "gaussian"},
             f"sqnr.sources: must be a non-empty subset of "
             f"['uniform', 'gaussian'], got {sources!r}")
        zetas = cfg.sqnr.get("zetas", [])
        need(isinstance(zetas, list) and zetas and
             all(isinstance(z, (int, float)) and 0 < z <= 1 for z in zetas),
             f"sqnr.zetas: must be a non-empty list of values in (0, 1], "
             f"got {zetas!r}")

    if cfg.kind == "single-carrier" and cfg.noise.get("enabled", False):
        snr = cfg.noise.get("snr_db")
        need(isinstance(snr, (int, float)),
             f"noise.snr_db: must be a number when noise is enabled, got {snr!r}")

    if cfg.kind == "rates":
        p_u = cfg.rates.get("p_u")
        need(isinstance(p_u, dict) and len(set(p_u or {}) & {"db", "linear"}) == 1,
             "rates.p_u: must carry exactly one of the keys 'db' or 'linear'")
        mode = cfg.rates.get("power_mode", "fixed")
        need(mode in ("fixed", "scaled"),
             f"rates.power_mode: must be 'fixed' or 'scaled', got {mode!r}")
        mc = cfg.rates.get("mc_trials", 0)
        need(isinstance(mc, int) and mc >= 1,
             f"rates.mc_trials: must be a positive integer, got {mc!r}")
        n_users = cfg.scenario.get("n_users", 0)
        need(isinstance(n_users, int) and n_users >= 1,
             f"scenario.n_users: must be a positive integer, got {n_users!r}")
        if cfg.sweep_axis != "scenario.n_antennas":
            n_ant = cfg.scenario.get("n_antennas", 0)
            need(isinstance(n_ant, int) and n_ant >= 1,
                 f"scenario.n_antennas: must be a positive integer, got {n_ant!r}")
        cases = cfg.rates.get("cases", [])
        need(isinstance(cases, list) and len(cases) >= 1,
             "rates.cases: need at least one detector/adc case")
        for i, case in enumerate(cases if isinstance(cases, list) else []):
            det = case.get("detector")
            need(det in DETECTORS,
                 f"rates.cases[{i}].detector: must be one of {DETECTORS}, got {det!r}")
            adc = case.get("adc", "ideal")
            need(adc in (*ADC_KINDS, "ideal"),
                 f"rates.cases[{i}].adc: must be modulo, conventional or ideal, "
                 f"got {adc!r}")
            bits = case.get("bits")
            if adc != "ideal" and bits is not None:
                need(isinstance(bits, int) and bits >= 1,
                     f"rates.cases[{i}].bits: must be a positive integer, got {bits!r}")

    if cfg.kind == "replay":
        samples = cfg.replay.get("samples", "")
        if axis != "replay.samples":
            need(isinstance(samples, str) and samples,
                 "replay.samples: path to a folded-sample CSV is required")

    return diags


def require_valid(cfg: ExperimentConfig):
    diags = validate(cfg)
    if diags:
        raise ValidationError(diags)
    return cfg
