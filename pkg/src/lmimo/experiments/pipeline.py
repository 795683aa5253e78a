"""Per-trial experiment bodies mapping one (sweep value, unit) to rows.

Each function here is a pure computation: it re-derives every random
stream from (seed, trial, label), so any row can be recomputed in any
process in any order. The runner only schedules these and merges the
returned dicts.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .. import channel as ch_mod
from .. import detection, rates
from ..modulo_adc import (
    FoldedFrame, ModuloConfig, fold_frame, frame_from_csv, frame_to_csv,
    quantize_conventional, quantize_to_levels, gaussian_optimal_quantizer,
    empirical_sqnr, analytic_sqnr,
)
from ..recovery import RecoveryConfig, recover, anchor_constant
from ..signal_chain import (
    Constellation, PulseShape, OfdmConfig,
    map_bits, pulse_shape, sample_symbol_instants,
    ofdm_modulate, nearest_point,
)
from .config import ExperimentConfig
from .rng import TrialStreams

# metric columns averaged over trials; everything else is a group key
METRICS = {
    "single-carrier": ("mse", "ber", "ser", "evm"),
    "ofdm": ("mse", "ber", "ser", "evm"),
    "sqnr": ("sqnr_db",),
}


def sweep_column(cfg: ExperimentConfig) -> str:
    return cfg.sweep_axis.split(".", 1)[1]


def _recovery_config(frame, cfg: ExperimentConfig) -> RecoveryConfig:
    order = int(cfg.recovery.get("order", 0))
    return RecoveryConfig.from_frame(
        frame,
        order=order if order > 0 else None,
        noise_exponent=float(cfg.recovery.get("noise_exponent", 1.0)),
    )


def _fold_recover_antennas(rx, cfg, sample_interval, bandwidth):
    """Per-antenna modulo capture and reconstruction.

    Returns (recovered stack, orders). The folding threshold tracks
    each antenna's own branch peak, as a per-ADC AGC would set it.
    """
    zeta = float(cfg.adc["zeta"])
    bits = int(cfg.adc["bits"])
    rec = np.empty_like(rx)
    orders = []
    for n in range(rx.shape[0]):
        row = rx[n]
        peak = max(float(np.max(np.abs(row.real))),
                   float(np.max(np.abs(row.imag))))
        mcfg = ModuloConfig(threshold=zeta * peak, bits=bits)
        frame = fold_frame(row, mcfg, sample_interval, bandwidth,
                           quantize=True)
        result = recover(frame, _recovery_config(frame, cfg))
        rec[n] = anchor_constant(result.samples, mcfg.threshold)
        orders.append(result.order)
    return rec, orders


def _user_symbols(cfg, streams):
    """Random payload bits mapped onto the constellation, per user."""
    con = Constellation.qam(int(cfg.waveform["constellation"]))
    n_users = int(cfg.scenario["n_users"])
    n_symbols = int(cfg.waveform["n_symbols"])
    rng = streams.get("bits")
    bits = rng.integers(0, 2, size=(n_users, n_symbols, con.bits_per_symbol))
    symbols = np.stack([map_bits(bits[m].ravel(), con)
                        for m in range(n_users)])
    return con, bits, symbols


def _shape_users(symbols, cfg):
    shape = PulseShape(rolloff=float(cfg.waveform["rolloff"]),
                       span=int(cfg.waveform.get("span", 16)))
    of = int(cfg.waveform["oversampling"])
    waves = [pulse_shape(row, of, shape) for row in symbols]
    ref = waves[0]
    return ref, np.stack([w.samples for w in waves])


def single_carrier_trial(cfg: ExperimentConfig, trial: int) -> dict:
    """Uplink round trip through folding ADCs at one operating point."""
    streams = TrialStreams(cfg.seed, trial)
    con, bits, symbols = _user_symbols(cfg, streams)
    ref, tx = _shape_users(symbols, cfg)

    n_ant = int(cfg.scenario["n_antennas"])
    chan = ch_mod.draw_small_scale(
        n_ant, tx.shape[0], ch_mod.NARROWBAND, streams.get("channel"))
    rx = ch_mod.apply_channel(tx, chan)
    if cfg.noise.get("enabled", False):
        # per-antenna receive SNR: signal power is measured, noise scaled
        snr = 10.0 ** (float(cfg.noise["snr_db"]) / 10.0)
        sig_power = float(np.mean(np.abs(rx) ** 2))
        rng = streams.get("noise")
        noise = rng.standard_normal(rx.shape) + 1j * rng.standard_normal(rx.shape)
        rx = rx + noise * math.sqrt(sig_power / snr / 2.0)

    rec, orders = _fold_recover_antennas(rx, cfg, ref.sample_interval,
                                         ref.bandwidth)

    soft = detection.detect_narrowband(
        sample_symbol_instants(rec, ref), chan.matrix,
        cfg.scenario["detector"])
    soft = soft / detection.ls_gain(soft, symbols)[:, None]
    rx_idx, rx_bits = detection.decide_symbols(soft, con)
    tx_idx = nearest_point(symbols, con)
    report = detection.error_metrics(
        bits, rx_bits.reshape(bits.shape), tx_idx, rx_idx,
        tx_wave=rx, rx_wave=rec)
    return {
        sweep_column(cfg): cfg.get(cfg.sweep_axis),
        "trial": trial,
        "order": max(orders),
        "mse": report.mse,
        "ber": report.ber,
        "ser": report.ser,
        "evm": report.evm,
    }


def ofdm_trial(cfg: ExperimentConfig, trial: int) -> dict:
    """OFDM round trip: multipath at block-sample spacing, folding ADCs
    on the interpolated waveform, per-subcarrier detection."""
    streams = TrialStreams(cfg.seed, trial)
    ocfg = OfdmConfig(subcarriers=int(cfg.ofdm["subcarriers"]),
                      cyclic_prefix=int(cfg.ofdm["cyclic_prefix"]))
    con = Constellation.qam(int(cfg.waveform["constellation"]))
    n_users = int(cfg.scenario["n_users"])
    n_blocks = int(cfg.ofdm["n_blocks"])
    k_sub = ocfg.subcarriers

    rng = streams.get("bits")
    bits = rng.integers(
        0, 2, size=(n_users, n_blocks, k_sub, con.bits_per_symbol))
    freq = np.stack([
        map_bits(bits[m].ravel(), con).reshape(n_blocks, k_sub)
        for m in range(n_users)])
    serial = ofdm_modulate(freq, ocfg).reshape(n_users, -1)

    n_ant = int(cfg.scenario["n_antennas"])
    pdp = ch_mod.PowerDelayProfile.uniform(int(cfg.ofdm["taps"]))
    chan = ch_mod.draw_small_scale(n_ant, n_users, pdp,
                                   streams.get("channel"))
    rx_sym = ch_mod.apply_channel(serial, chan)

    # interpolate each antenna stream onto the oversampled grid; the
    # pulse is LTI, so interpolation commutes with the per-tap channel
    shape = PulseShape(rolloff=float(cfg.waveform["rolloff"]),
                       span=int(cfg.waveform.get("span", 16)))
    of = int(cfg.waveform["oversampling"])
    waves = [pulse_shape(row, of, shape) for row in rx_sym]
    ref = waves[0]
    rx = np.stack([w.samples for w in waves])

    rec, orders = _fold_recover_antennas(rx, cfg, ref.sample_interval,
                                         ref.bandwidth)

    blocks = sample_symbol_instants(rec, ref).reshape(
        n_ant, n_blocks, ocfg.block_length)
    resp = ch_mod.channel_freq_response(chan, k_sub)
    soft = detection.detect_ofdm(blocks, resp, ocfg,
                                 cfg.scenario["detector"])
    flat = soft.reshape(n_users, -1)
    flat = flat / detection.ls_gain(flat, freq.reshape(n_users, -1))[:, None]
    rx_idx, rx_bits = detection.decide_symbols(flat, con)
    tx_idx = nearest_point(freq.reshape(n_users, -1), con)
    report = detection.error_metrics(
        bits.reshape(n_users, -1), rx_bits.reshape(n_users, -1),
        tx_idx, rx_idx, tx_wave=rx, rx_wave=rec)
    return {
        sweep_column(cfg): cfg.get(cfg.sweep_axis),
        "trial": trial,
        "order": max(orders),
        "mse": report.mse,
        "ber": report.ber,
        "ser": report.ser,
        "evm": report.evm,
    }


def sqnr_trial(cfg: ExperimentConfig, trial: int) -> list:
    """Quantizer-only SQNR of synthetic sources at one bit depth.

    The modulo figure quantizes the folded signal; under exact
    unfolding the reconstruction error equals that cell error, so no
    recovery pass is needed here.
    """
    bits = int(cfg.adc["bits"])
    n = int(cfg.sqnr["samples"])
    sources = list(cfg.sqnr["sources"])
    zetas = [float(z) for z in cfg.sqnr["zetas"]]
    streams = TrialStreams(cfg.seed, trial)
    rows = []
    for source in sources:
        rng = streams.get(f"source:{source}")
        if source == "uniform":
            x = rng.uniform(-1.0, 1.0, size=n)
        else:
            x = rng.standard_normal(n)
        peak = float(np.max(np.abs(x)))

        if source == "gaussian":
            levels, edges, _ = gaussian_optimal_quantizer(bits)
            q = quantize_to_levels(x, levels, edges)
        else:
            q = quantize_conventional(x, bits, full_scale=1.0)
        rows.append({
            "bits": bits, "trial": trial, "source": source,
            "adc": "conventional", "zeta": 0.0,
            "sqnr_db": empirical_sqnr(x, q).sqnr_db,
            "analytic_db": analytic_sqnr(source, "conventional", bits),
        })

        for zeta in zetas:
            mcfg = ModuloConfig(threshold=zeta * peak, bits=bits)
            folded = np.mod(x + mcfg.threshold,
                            2.0 * mcfg.threshold) - mcfg.threshold
            q = quantize_conventional(folded, bits,
                                      full_scale=mcfg.threshold)
            rows.append({
                "bits": bits, "trial": trial, "source": source,
                "adc": "modulo", "zeta": zeta,
                "sqnr_db": empirical_sqnr(x, x + (q - folded)).sqnr_db,
                "analytic_db": (analytic_sqnr(source, "modulo", bits,
                                              zeta=zeta)
                                if source == "uniform" else ""),
            })
    return rows


def eye_trial(cfg: ExperimentConfig, trial: int) -> list:
    """Folded and recovered eye-diagram traces of one user's waveform."""
    streams = TrialStreams(cfg.seed, trial)
    con = Constellation.qam(int(cfg.waveform["constellation"]))
    n_symbols = int(cfg.waveform["n_symbols"])
    rng = streams.get("bits")
    bits = rng.integers(0, 2, size=n_symbols * con.bits_per_symbol)
    ref, tx = _shape_users(map_bits(bits, con)[None, :], cfg)
    rec, _ = _fold_recover_antennas(tx, cfg, ref.sample_interval,
                                    ref.bandwidth)

    zeta = float(cfg.adc["zeta"])
    peak = max(float(np.max(np.abs(tx.real))), float(np.max(np.abs(tx.imag))))
    folded = fold_frame(tx[0],
                        ModuloConfig(zeta * peak, int(cfg.adc["bits"])),
                        ref.sample_interval, ref.bandwidth,
                        quantize=True).samples

    of = ref.oversampling
    stages = (("clean", tx[0]), ("folded", folded), ("recovered", rec[0]))
    rows = []
    for stage, samples in stages:
        traces = detection.eye_traces(samples, of, ref.symbol_offset)
        for i, trace in enumerate(traces):
            for k, value in enumerate(trace):
                rows.append({
                    "rolloff": float(cfg.waveform["rolloff"]),
                    "stage": stage, "trace": i,
                    "t": (k - of) / of, "value": float(value),
                })
    return rows


def constellation_trial(cfg: ExperimentConfig, trial: int) -> list:
    """Received scatter points for one detector's geometry block."""
    detector = cfg.scenario["detector"]
    block = cfg.scenario[detector]
    sized = (cfg.with_override("scenario.n_users", int(block["n_users"]))
             .with_override("scenario.n_antennas", int(block["n_antennas"])))

    streams = TrialStreams(cfg.seed, trial)
    con, _, symbols = _user_symbols(sized, streams)
    ref, tx = _shape_users(symbols, sized)
    chan = ch_mod.draw_small_scale(
        int(block["n_antennas"]), tx.shape[0], ch_mod.NARROWBAND,
        streams.get("channel"))
    rx = ch_mod.apply_channel(tx, chan)
    rec, _ = _fold_recover_antennas(rx, sized, ref.sample_interval,
                                    ref.bandwidth)
    soft = detection.detect_narrowband(
        sample_symbol_instants(rec, ref), chan.matrix, detector)
    soft = soft / detection.ls_gain(soft, symbols)[:, None]
    tx_idx = nearest_point(symbols, con)
    rows = []
    for m in range(soft.shape[0]):
        for k in range(soft.shape[1]):
            rows.append({
                "detector": detector, "trial": trial, "user": m,
                "tx_index": int(tx_idx[m, k]),
                "re": float(soft[m, k].real),
                "im": float(soft[m, k].imag),
            })
    return rows


def _case_bits(case, cfg):
    adc = case.get("adc", "ideal")
    if adc == "ideal":
        return None
    bits = case.get("bits")
    return int(cfg.adc["bits"]) if bits is None else int(bits)


def _case_label(case, bits):
    adc = case.get("adc", "ideal")
    tail = "ideal" if adc == "ideal" else f"{adc}-b{bits}"
    return f"{case['detector']}-{tail}"


def rates_case(cfg: ExperimentConfig, case_index: int) -> dict:
    """Closed-form and Monte Carlo sum rate for one detector/ADC case.

    The large-scale gains come from a run-level stream so every case
    and sweep value shares one cell geometry; small-scale draws share
    per-trial streams across cases for common-randomness comparisons.
    """
    case = cfg.rates["cases"][case_index]
    n_users = int(cfg.scenario["n_users"])
    n_ant = int(cfg.scenario["n_antennas"])
    geo_rng = TrialStreams(cfg.seed, 0).get("geometry")
    eta, _ = ch_mod.draw_large_scale(ch_mod.CellGeometry(), n_users, geo_rng)

    p_cfg = cfg.rates["p_u"]
    p_u = (10.0 ** (float(p_cfg["db"]) / 10.0)
           if "db" in p_cfg else float(p_cfg["linear"]))
    if cfg.rates.get("power_mode", "fixed") == "scaled":
        p_u = p_u / n_ant

    bits = _case_bits(case, cfg)
    scen = rates.RateScenario(
        n_antennas=n_ant, n_users=n_users, eta=tuple(eta), p_u=p_u,
        combiner=case["detector"],
        adc=case.get("adc", "ideal"), bits=bits,
        zeta=float(cfg.adc.get("zeta", 0.1)))

    mc_trials = int(cfg.rates["mc_trials"])
    streams = [TrialStreams(cfg.seed, t).get("smallscale")
               for t in range(mc_trials)]
    mc = rates.ergodic_rate_mc(scen, mc_trials, streams=streams)

    if case["detector"] == rates.ZF:
        approx = rates.zf_rate_approx(
            scen, float(cfg.rates.get("delta", 1e-3)))
    else:
        approx = rates.mrc_rate_approx(scen)

    row = {
        sweep_column(cfg): cfg.get(cfg.sweep_axis),
        "label": _case_label(case, bits),
        "detector": case["detector"],
        "adc": case.get("adc", "ideal"),
        "bits": 0 if bits is None else bits,
        "gamma": scen.gamma,
        "sum_rate_mc": mc.sum_rate,
        "sum_rate_approx": approx.sum_rate,
        "xi": ("" if bits is None else
               rates.energy_efficiency(mc.sum_rate, bits, n_ant)),
    }
    return row


def replay_run(cfg: ExperimentConfig, index: int) -> dict:
    """Reconstruct a previously captured folded CSV."""
    path = str(cfg.get(cfg.sweep_axis))
    sidecar = cfg.replay.get("sidecar") or path + ".json"
    frame = frame_from_csv(path, sidecar)
    result = recover(frame, _recovery_config(frame, cfg))
    rec = anchor_constant(result.samples, frame.config.threshold)

    out_dir = cfg.output.get("dir", ".")
    stem = os.path.splitext(os.path.basename(path))[0]
    out_path = os.path.join(out_dir, f"recovered-{stem}.csv")
    # same container and sidecar metadata, samples now un-folded
    out_frame = FoldedFrame(
        samples=rec, config=frame.config,
        sample_interval=frame.sample_interval, bandwidth=frame.bandwidth,
        beta=frame.beta, quantized=frame.quantized)
    frame_to_csv(out_frame, out_path, out_path + ".json")

    row = {
        "samples": path, "recovered": out_path,
        "n_samples": frame.n_samples, "order": result.order,
        "residual": "",
    }
    reference = cfg.replay.get("reference", "")
    if reference:
        ref_frame = frame_from_csv(reference, reference + ".json")
        row["residual"] = float(
            np.max(np.abs(rec - ref_frame.samples)))
    return row


# unit = second task coordinate: trial index, case index or file index
KIND_FUNCTIONS = {
    "single-carrier": single_carrier_trial,
    "ofdm": ofdm_trial,
    "sqnr": sqnr_trial,
    "eye": eye_trial,
    "constellation": constellation_trial,
    "rates": rates_case,
    "replay": replay_run,
}


def build_tasks(cfg: ExperimentConfig):
    """Ordered (sweep value, unit index) pairs for one run."""
    values = cfg.sweep_values
    if cfg.kind == "rates":
        units = range(len(cfg.rates["cases"]))
    elif cfg.kind == "replay":
        units = range(1)
    else:
        units = range(cfg.trials)
    return [(value, unit) for value in values for unit in units]


def run_task(cfg: ExperimentConfig, value, unit):
    """Execute one task; always returns a list of rows."""
    swept = cfg.with_override(cfg.sweep_axis, value)
    out = KIND_FUNCTIONS[cfg.kind](swept, unit)
    return out if isinstance(out, list) else [out]


def aggregate(kind, rows):
    """Mean and standard error over trials, grouped by non-metric keys."""
    metrics = METRICS.get(kind)
    if not metrics:
        return [dict(r) for r in rows]
    groups = {}
    order = []
    for row in rows:
        key = tuple((k, v) for k, v in row.items()
                    if k not in metrics and k != "trial")
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)
    out = []
    for key in order:
        bucket = groups[key]
        agg = dict(key)
        agg["trials"] = len(bucket)
        for m in metrics:
            vals = np.array([b[m] for b in bucket], dtype=np.float64)
            agg[m] = float(vals.mean())
            agg[m + "_se"] = (float(vals.std(ddof=1) / math.sqrt(len(vals)))
                              if len(vals) > 1 else 0.0)
        out.append(agg)
    return out
