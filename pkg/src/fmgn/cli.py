"""Experiment driver: reproduces the package's reference curves from config files.

One entry point (``fmgn``) with subcommands; every experiment is described by
a JSON config with the documented schema (see README), validated strictly
before execution, and emits deterministic CSV/JSON keyed by a hash of the
resolved configuration.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import analytic, capacity, modem, montecarlo, waveform
from .channel import ChannelModel, NoiseParams
from .params import SystemParams, dbm_to_watts, memory_estimate, nli_coefficient_lumped

SWEEP_HEADER = ["P_dbm", "N", "metric", "value", "std_error", "seed", "config_hash"]

EXPERIMENTS = (
    "params_report",
    "ber_ser_sweep",
    "sim_sweep",
    "capacity_sweep",
    "gn_capacity",
    "waveform_pulse",
    "waveform_nonstationary",
)


class ConfigError(ValueError):
    """Configuration file violates the documented schema."""


# ---------------------------------------------------------------------------
# Config schema


def _check_keys(section: str, obj: dict, allowed: Sequence[str]) -> None:
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(unknown)}")


def _require(obj: dict, section: str, key: str) -> Any:
    if key not in obj:
        raise ConfigError(f"missing required key {key!r} in {section}")
    return obj[key]


SYSTEM_KEYS = {
    "alpha_db_per_km": float,
    "beta2_ps2_per_km": float,
    "gamma_per_w_km": float,
    "spans": int,
    "length_km": float,
    "symbol_rate_gbaud": float,
    "p_ase_w": float,
    "eta_per_w2": float,
    "epsilon": float,
}

ENGINE_DEFAULTS: dict[str, Any] = {
    "seed": 12345,
    "threads": 1,
    # simulation
    "symbols_per_trial": 1_000_000,
    "trials": 10,
    "detector": "med",
    "boundary": "wrap",
    "discard_edges": False,
    # capacity
    "mc_samples": 100_000,
    "quadrature_nodes": 512,
    "screen_samples": None,
    "screen_nodes": None,
    "refine_top": 6,
    "nu_grid": None,
    "ratio_grid": None,
    "monotone_envelope": True,
    # waveform
    "step_km": 0.1,
    "oversampling": 16,
    "n_slots": 2048,
    "width_ps": 15.6,
    "peak_power_mw": 0.1,
    "block_len": 128,
    "on_power_mw": 4.0,
    "n_cycles": 4,
    "waveform_trials": 8,
    "waveform_memory": 50,
    # params report
    "dual_polarization": False,
}


def _parse_system(obj: Optional[dict]) -> SystemParams:
    if obj is None:
        return SystemParams.reference()
    if not isinstance(obj, dict):
        raise ConfigError("system must be a mapping")
    _check_keys("system", obj, list(SYSTEM_KEYS))
    kwargs = {}
    for key, value in obj.items():
        caster = SYSTEM_KEYS[key]
        try:
            kwargs[key] = caster(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"system.{key}: {exc}") from exc
    try:
        return SystemParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"system: {exc}") from exc


def _parse_power_grid(obj: Any) -> list[float]:
    if isinstance(obj, list):
        grid = [float(v) for v in obj]
    elif isinstance(obj, dict):
        _check_keys("sweep.power_dbm", obj, ["start", "stop", "step"])
        start = float(_require(obj, "sweep.power_dbm", "start"))
        stop = float(_require(obj, "sweep.power_dbm", "stop"))
        step = float(_require(obj, "sweep.power_dbm", "step"))
        if step <= 0:
            raise ConfigError("sweep.power_dbm.step must be positive")
        count = int(round((stop - start) / step)) + 1
        grid = [start + i * step for i in range(max(count, 0))]
        grid = [p for p in grid if p <= stop + 1e-9]
    else:
        raise ConfigError("sweep.power_dbm must be a list or {start, stop, step}")
    if not grid:
        raise ConfigError("sweep.power_dbm grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("sweep.power_dbm must be strictly increasing")
    return grid


def _parse_memory_list(obj: Any, allow_limits: bool) -> list:
    if not isinstance(obj, list) or not obj:
        raise ConfigError("sweep.memory must be a nonempty list")
    out = []
    for entry in obj:
        if isinstance(entry, bool):
            raise ConfigError(f"invalid memory entry {entry!r}")
        if isinstance(entry, int):
            if entry < 0:
                raise ConfigError("memory entries must be nonnegative")
            out.append(entry)
        elif allow_limits and entry in ("inf", "awgn"):
            out.append(entry)
        else:
            raise ConfigError(f"invalid memory entry {entry!r}")
    return out


@dataclass
class ResolvedConfig:
    experiment: str
    system: SystemParams
    power_dbm: list[float] = field(default_factory=list)
    memory: list = field(default_factory=list)
    engine: dict = field(default_factory=dict)
    out_path: Optional[str] = None
    out_format: str = "csv"
    config_hash: str = ""


def resolve_config(
    raw: dict,
    experiment: str,
    seed: Optional[int] = None,
    out_path: Optional[str] = None,
    out_format: Optional[str] = None,
    threads: Optional[int] = None,
) -> ResolvedConfig:
    """Validate, default, and freeze a raw config mapping."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    _check_keys("config", raw, ["system", "experiment", "sweep", "engine", "output"])
    declared = raw.get("experiment")
    if declared is not None:
        if declared not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {declared!r}")
        if declared != experiment:
            raise ConfigError(
                f"config declares experiment {declared!r} but the subcommand runs {experiment!r}"
            )

    system = _parse_system(raw.get("system"))

    engine_raw = raw.get("engine", {})
    if not isinstance(engine_raw, dict):
        raise ConfigError("engine must be a mapping")
    _check_keys("engine", engine_raw, list(ENGINE_DEFAULTS))
    engine = dict(ENGINE_DEFAULTS)
    engine.update(engine_raw)
    if seed is not None:
        engine["seed"] = seed
    if threads is not None:
        engine["threads"] = threads
    if engine["threads"] < 1:
        raise ConfigError("engine.threads must be at least 1")

    sweep_raw = raw.get("sweep", {})
    if not isinstance(sweep_raw, dict):
        raise ConfigError("sweep must be a mapping")
    _check_keys("sweep", sweep_raw, ["power_dbm", "memory"])

    power_dbm: list[float] = []
    memory: list = []
    if experiment in ("ber_ser_sweep", "sim_sweep", "capacity_sweep", "gn_capacity"):
        power_dbm = _parse_power_grid(_require(sweep_raw, "sweep", "power_dbm"))
    if experiment in ("ber_ser_sweep", "sim_sweep"):
        memory = _parse_memory_list(
            _require(sweep_raw, "sweep", "memory"), allow_limits=True
        )
    elif experiment == "capacity_sweep":
        memory = _parse_memory_list(_require(sweep_raw, "sweep", "memory"), allow_limits=False)

    output_raw = raw.get("output", {})
    if not isinstance(output_raw, dict):
        raise ConfigError("output must be a mapping")
    _check_keys("output", output_raw, ["path", "format"])
    path = out_path if out_path is not None else output_raw.get("path")
    fmt = out_format if out_format is not None else output_raw.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"output.format must be 'csv' or 'json', got {fmt!r}")

    cfg = ResolvedConfig(
        experiment=experiment,
        system=system,
        power_dbm=power_dbm,
        memory=memory,
        engine=engine,
        out_path=path,
        out_format=fmt,
    )
    hash_source = {
        "experiment": experiment,
        "system": {k: getattr(system, k) for k in SYSTEM_KEYS},
        "power_dbm": power_dbm,
        "memory": memory,
        "engine": {k: engine[k] for k in sorted(engine) if k != "threads"},
    }
    canon = json.dumps(hash_source, sort_keys=True, separators=(",", ":"), default=str)
    cfg.config_hash = hashlib.sha256(canon.encode()).hexdigest()[:12]
    return cfg


# ---------------------------------------------------------------------------
# Result tables


@dataclass
class RunResult:
    header: list[str]
    rows: list[list]
    summary: list[str] = field(default_factory=list)


def _memory_sort_key(value) -> tuple:
    if value is None or value == "":
        return (3, 0)
    if isinstance(value, int):
        return (0, value)
    return (1, 0) if value == "inf" else (2, 0)


def _sort_sweep_rows(rows: list[list]) -> list[list]:
    return sorted(
        rows,
        key=lambda r: (r[2], _memory_sort_key(r[1]), -math.inf if r[0] is None else r[0]),
    )


def _sweep_row(cfg, p_dbm, memory, metric, value, std_error, seed) -> list:
    return [p_dbm, memory, metric, float(value), float(std_error), int(seed), cfg.config_hash]


def _parallel_rows(tasks: list[Callable[[], list[list]]], threads: int) -> list[list]:
    if threads <= 1 or len(tasks) <= 1:
        chunks = [task() for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda t: t(), tasks))
    return [row for chunk in chunks for row in chunk]


# ---------------------------------------------------------------------------
# Experiments


def _run_params_report(cfg: ResolvedConfig) -> RunResult:
    eta = nli_coefficient_lumped(cfg.system, bool(cfg.engine["dual_polarization"]))
    two_n = memory_estimate(cfg.system)
    seed = cfg.engine["seed"]
    rows = [
        _sweep_row(cfg, None, None, "nli_coefficient_w2", eta, 0.0, seed),
        _sweep_row(cfg, None, None, "memory_estimate_symbols", two_n, 0.0, seed),
        _sweep_row(cfg, None, None, "table_eta_w2", cfg.system.eta_per_w2, 0.0, seed),
        _sweep_row(cfg, None, None, "p_ase_w", cfg.system.p_ase_w, 0.0, seed),
    ]
    summary = [
        f"nli_coefficient = {eta:.1f} 1/W^2"
        + (" (dual polarization)" if cfg.engine["dual_polarization"] else ""),
        f"memory_estimate 2N = {two_n:.1f} symbols",
    ]
    return RunResult(SWEEP_HEADER, _sort_sweep_rows(rows), summary)


def _noise(cfg: ResolvedConfig) -> NoiseParams:
    return NoiseParams(p_ase=cfg.system.p_ase_w, eta=cfg.system.eta_per_w2)


def _run_ber_ser_sweep(cfg: ResolvedConfig) -> RunResult:
    noise = _noise(cfg)
    seed = cfg.engine["seed"]
    rows = []
    for n in cfg.memory:
        for p_dbm in cfg.power_dbm:
            p = dbm_to_watts(p_dbm)
            if n == "inf":
                ber, ser = analytic.qam16_error_rates_limit(p, noise, "gn")
            elif n == "awgn":
                ber, ser = analytic.qam16_error_rates_limit(p, noise, "awgn")
            else:
                ber = analytic.qam16_bit_error_rate(p, n, noise)
                ser = analytic.qam16_symbol_error_rate(p, n, noise)
            rows.append(_sweep_row(cfg, p_dbm, n, "ber", ber, 0.0, seed))
            rows.append(_sweep_row(cfg, p_dbm, n, "ser", ser, 0.0, seed))
    return RunResult(SWEEP_HEADER, _sort_sweep_rows(rows))


def _sim_point(cfg: ResolvedConfig, n, p_dbm: float) -> list[list]:
    noise = _noise(cfg)
    p = dbm_to_watts(p_dbm)
    if n == "awgn":
        channel = ChannelModel.awgn(noise.p_ase)
    elif n == "inf":
        channel = ChannelModel.gn(noise, p)
    else:
        channel = ChannelModel.finite_memory(noise, n)
    detector = (
        modem.DetectorKind.med()
        if cfg.engine["detector"] == "med"
        else modem.DetectorKind.genie_ml()
    )
    point_seed = montecarlo.derive_seed(cfg.engine["seed"], f"sim:N={n}:P={p_dbm:.6g}", 0)
    plan = montecarlo.SimPlan(
        constellation=modem.Constellation.qam16(average_power=p),
        channel=channel,
        detector=detector,
        symbols_per_trial=int(cfg.engine["symbols_per_trial"]),
        trials=int(cfg.engine["trials"]),
        master_seed=point_seed,
        boundary=cfg.engine["boundary"],
        discard_edges=bool(cfg.engine["discard_edges"]),
    )
    counts = montecarlo.run_ber_ser(plan)
    return [
        _sweep_row(cfg, p_dbm, n, "ber", counts.ber, counts.ber_sigma, point_seed),
        _sweep_row(cfg, p_dbm, n, "ser", counts.ser, counts.ser_sigma, point_seed),
    ]


def _run_sim_sweep(cfg: ResolvedConfig) -> RunResult:
    if cfg.engine["detector"] not in ("med", "genie_ml"):
        raise ConfigError(f"unknown detector {cfg.engine['detector']!r}")
    tasks = [
        (lambda n=n, p=p: _sim_point(cfg, n, p))
        for n in cfg.memory
        for p in cfg.power_dbm
    ]
    rows = _parallel_rows(tasks, int(cfg.engine["threads"]))
    return RunResult(SWEEP_HEADER, _sort_sweep_rows(rows))


def _capacity_point(cfg: ResolvedConfig, n: int, p_dbm: float) -> list[list]:
    noise = _noise(cfg)
    p = dbm_to_watts(p_dbm)
    point_seed = montecarlo.derive_seed(cfg.engine["seed"], f"lb:N={n}:P={p_dbm:.6g}", 0)
    nu_grid = cfg.engine["nu_grid"] or capacity.DEFAULT_NU_GRID
    ratio_grid = cfg.engine["ratio_grid"] or capacity.DEFAULT_RATIO_GRID
    result = capacity.optimize_lower_bound(
        p,
        n,
        noise,
        nu_grid=nu_grid,
        ratio_grid=ratio_grid,
        mc_samples=int(cfg.engine["mc_samples"]),
        seed=point_seed,
        n_nodes=int(cfg.engine["quadrature_nodes"]),
        screen_samples=cfg.engine["screen_samples"],
        screen_nodes=cfg.engine["screen_nodes"],
        refine_top=int(cfg.engine["refine_top"]),
    )
    best = result.best_input
    ratio = best.r1**2 / best.scale if best.memory else 0.0
    return [
        _sweep_row(cfg, p_dbm, n, "capacity_lb", result.best_estimate.value,
                   result.best_estimate.std_error, point_seed),
        _sweep_row(cfg, p_dbm, n, "optimal_nu", best.nu, 0.0, point_seed),
        _sweep_row(cfg, p_dbm, n, "optimal_ratio", ratio, 0.0, point_seed),
    ]


def _run_capacity_sweep(cfg: ResolvedConfig) -> RunResult:
    tasks = [
        (lambda n=n, p=p: _capacity_point(cfg, n, p))
        for n in cfg.memory
        for p in cfg.power_dbm
    ]
    rows = _parallel_rows(tasks, int(cfg.engine["threads"]))
    if cfg.engine["monotone_envelope"]:
        for n in cfg.memory:
            points = sorted(
                (r for r in rows if r[2] == "capacity_lb" and r[1] == n),
                key=lambda r: r[0],
            )
            values = capacity.monotone_envelope(
                [r[0] for r in points], [r[3] for r in points]
            )
            best_so_far = 0
            for i, (row, value) in enumerate(zip(points, values)):
                if points[i][3] >= points[best_so_far][3]:
                    best_so_far = i
                rows.append(
                    _sweep_row(cfg, row[0], n, "capacity_lb_envelope", value,
                               points[best_so_far][4], row[5])
                )
    return RunResult(SWEEP_HEADER, _sort_sweep_rows(rows))


def _run_gn_capacity(cfg: ResolvedConfig) -> RunResult:
    noise = _noise(cfg)
    seed = cfg.engine["seed"]
    rows = []
    for p_dbm in cfg.power_dbm:
        p = dbm_to_watts(p_dbm)
        rows.append(_sweep_row(cfg, p_dbm, None, "capacity_gn",
                               capacity.capacity_gn(p, noise), 0.0, seed))
        rows.append(_sweep_row(cfg, p_dbm, None, "capacity_awgn",
                               capacity.capacity_awgn(p, noise.p_ase), 0.0, seed))
    summary = []
    if noise.eta > 0:
        p_star, c_star = capacity.gn_capacity_peak(noise)
        from .params import watts_to_dbm

        rows.append(_sweep_row(cfg, None, None, "gn_peak_power_dbm",
                               watts_to_dbm(p_star), 0.0, seed))
        rows.append(_sweep_row(cfg, None, None, "gn_peak_bits", c_star, 0.0, seed))
        summary.append(
            f"GN capacity peak: {c_star:.3f} bit/symbol at {watts_to_dbm(p_star):.2f} dBm"
        )
    return RunResult(SWEEP_HEADER, _sort_sweep_rows(rows), summary)


def _run_waveform_pulse(cfg: ResolvedConfig) -> RunResult:
    result = waveform.pulse_broadening_experiment(
        cfg.system,
        peak_power_w=cfg.engine["peak_power_mw"] * 1e-3,
        width_ps=float(cfg.engine["width_ps"]),
        n_slots=int(cfg.engine["n_slots"]),
        oversampling=int(cfg.engine["oversampling"]),
        step_km=float(cfg.engine["step_km"]),
    )
    os_ = int(cfg.engine["oversampling"])
    centers = slice(os_ // 2, None, os_)
    tx = np.abs(result.input_grid.samples[centers])
    rx = np.abs(result.output_grid.samples[centers])
    rows = [[k, float(a), float(b)] for k, (a, b) in enumerate(zip(tx, rx))]
    summary = [
        f"input_rms_width_slots = {result.input_width_slots:.3f}",
        f"output_rms_width_slots = {result.output_width_slots:.3f}",
    ]
    return RunResult(["slot", "tx_amplitude", "rx_amplitude"], rows, summary)


def _run_waveform_nonstationary(cfg: ResolvedConfig) -> RunResult:
    result = waveform.nonstationary_qpsk_experiment(
        cfg.system,
        block_len=int(cfg.engine["block_len"]),
        on_power_w=cfg.engine["on_power_mw"] * 1e-3,
        n_cycles=int(cfg.engine["n_cycles"]),
        trials=int(cfg.engine["waveform_trials"]),
        memory=int(cfg.engine["waveform_memory"]),
        oversampling=int(cfg.engine["oversampling"]),
        step_km=float(cfg.engine["step_km"]),
        seed=int(cfg.engine["seed"]),
    )
    rows = [
        [k, float(tx), float(a), float(b), float(c)]
        for k, (tx, a, b, c) in enumerate(
            zip(result.tx_amplitude, result.rx_nlse,
                result.rx_finite_memory, result.rx_gn)
        )
    ]
    summary = [
        f"block_variance_ratio_nlse = {result.ratio_nlse:.3f}",
        f"block_variance_ratio_finite_memory = {result.ratio_finite_memory:.3f}",
        f"block_variance_ratio_gn = {result.ratio_gn:.3f}",
        f"rank_correlation_nlse_fm = {result.rank_correlation:.3f}",
    ]
    return RunResult(
        ["k", "tx_amplitude", "rx_nlse", "rx_finite_memory", "rx_gn"], rows, summary
    )


RUNNERS = {
    "params_report": _run_params_report,
    "ber_ser_sweep": _run_ber_ser_sweep,
    "sim_sweep": _run_sim_sweep,
    "capacity_sweep": _run_capacity_sweep,
    "gn_capacity": _run_gn_capacity,
    "waveform_pulse": _run_waveform_pulse,
    "waveform_nonstationary": _run_waveform_nonstationary,
}


def run_experiment(cfg: ResolvedConfig) -> RunResult:
    """Execute a resolved config; deterministic for fixed config and seeds."""
    return RUNNERS[cfg.experiment](cfg)


# ---------------------------------------------------------------------------
# Serialization


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_result(result: RunResult, path: str, fmt: str) -> None:
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(result.header)
            for row in result.rows:
                writer.writerow([_format_cell(v) for v in row])
    else:
        payload = {"header": result.header, "rows": result.rows}
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, default=str)
            fh.write("\n")


def _load_table(path: str) -> tuple[list[str], list[list[str]]]:
    if path.endswith(".json"):
        with open(path) as fh:
            payload = json.load(fh)
        return list(payload["header"]), [[_format_cell(v) for v in r] for r in payload["rows"]]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise ConfigError(f"{path} is empty")
    return rows[0], rows[1:]


def compare_results(
    path_a: str,
    path_b: str,
    tolerance: float = 0.0,
    mode: str = "abs",
    sigma_mult: float = 3.0,
) -> tuple[bool, list[str]]:
    """Row-by-row comparison of two sweep tables.

    Rows are matched on (metric, N, P_dbm); the value columns are compared by
    absolute delta, relative delta, or a combined standard-error budget
    (``sigma`` mode, falling back to absolute when both rows are exact).
    """
    header_a, rows_a = _load_table(path_a)
    header_b, rows_b = _load_table(path_b)
    if header_a != SWEEP_HEADER or header_b != SWEEP_HEADER:
        raise ConfigError("compare requires two sweep tables with the standard header")

    def index(rows) -> dict:
        table = {}
        for row in rows:
            key = (row[2], row[1], row[0])
            if key in table:
                raise ConfigError(f"duplicate row key {key}")
            table[key] = (float(row[3]), float(row[4]))
        return table

    a, b = index(rows_a), index(rows_b)
    if set(a) != set(b):
        raise ConfigError("compare: the two tables cover different (metric, N, P) rows")

    report = []
    ok = True
    for key in sorted(a):
        va, sa = a[key]
        vb, sb = b[key]
        delta = abs(va - vb)
        if mode == "abs":
            passed = delta <= tolerance
            budget = tolerance
        elif mode == "rel":
            budget = tolerance * max(abs(va), abs(vb), 1e-300)
            passed = delta <= budget
        elif mode == "sigma":
            spread = math.hypot(sa, sb)
            budget = sigma_mult * spread if spread > 0 else tolerance
            passed = delta <= budget
        else:
            raise ConfigError(f"unknown compare mode {mode!r}")
        ok &= passed
        if not passed:
            report.append(
                f"FAIL {key}: |{va:.6g} - {vb:.6g}| = {delta:.3g} > {budget:.3g}"
            )
    report.append(f"{'PASS' if ok else 'FAIL'}: {len(a)} rows compared")
    return ok, report


# ---------------------------------------------------------------------------
# Entry point


def _add_common(parser: argparse.ArgumentParser, config_required: bool) -> None:
    parser.add_argument("--config", required=config_required, help="JSON config path")
    parser.add_argument("--out", help="output file path (overrides config)")
    parser.add_argument("--format", choices=["csv", "json"], dest="fmt")
    parser.add_argument("--seed", type=int, help="master seed (overrides config)")
    parser.add_argument("--threads", type=int, help="worker threads for sweep points")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmgn", description="Finite-memory Gaussian-noise channel laboratory"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, _experiment in (
        ("params", "params_report"),
        ("ber-ser", "ber_ser_sweep"),
        ("simulate", "sim_sweep"),
        ("capacity-lb", "capacity_sweep"),
        ("gn-capacity", "gn_capacity"),
    ):
        sp = sub.add_parser(name)
        _add_common(sp, config_required=(name not in ("params",)))

    wf = sub.add_parser("waveform")
    wf_sub = wf.add_subparsers(dest="waveform_command", required=True)
    for name in ("pulse", "nonstationary"):
        sp = wf_sub.add_parser(name)
        _add_common(sp, config_required=False)

    cp = sub.add_parser("compare")
    cp.add_argument("result_a")
    cp.add_argument("result_b")
    cp.add_argument("--tolerance", type=float, default=0.0)
    cp.add_argument("--mode", choices=["abs", "rel", "sigma"], default="abs")
    cp.add_argument("--sigma-mult", type=float, default=3.0)
    return parser


COMMAND_EXPERIMENTS = {
    "params": "params_report",
    "ber-ser": "ber_ser_sweep",
    "simulate": "sim_sweep",
    "capacity-lb": "capacity_sweep",
    "gn-capacity": "gn_capacity",
    ("waveform", "pulse"): "waveform_pulse",
    ("waveform", "nonstationary"): "waveform_nonstationary",
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "compare":
        try:
            ok, report = compare_results(
                args.result_a, args.result_b, args.tolerance, args.mode, args.sigma_mult
            )
        except (ConfigError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        for line in report:
            print(line)
        return 0 if ok else 1

    key = (args.command, args.waveform_command) if args.command == "waveform" else args.command
    experiment = COMMAND_EXPERIMENTS[key]

    raw: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 2
        except json.JSONDecodeError as exc:
            print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
            return 2

    try:
        cfg = resolve_config(
            raw, experiment, seed=args.seed, out_path=args.out,
            out_format=args.fmt, threads=args.threads,
        )
        result = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except capacity.QuadratureError as exc:
        print(f"quadrature error: {exc}", file=sys.stderr)
        return 3
    except capacity.InfeasibleInputError as exc:
        print(f"infeasible capacity grid: {exc}", file=sys.stderr)
        return 4
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if cfg.out_path:
        write_result(result, cfg.out_path, cfg.out_format)
        print(f"wrote {len(result.rows)} rows to {cfg.out_path}")
    for line in result.summary:
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
