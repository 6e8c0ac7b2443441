"""Command-line front end.

Subcommands: measures, sweep, evolve, probe, qnd, plot.  Flags can also
be supplied as a JSON document via --config (keys are the flag names
with underscores); explicit flags win on conflict.  Outputs are byte
deterministic for identical configuration: floats are serialized with
12 significant digits and sweep rows are assembled in grid order even
when computed concurrently.

Exit codes: 0 success, 2 argument validation, 3 I/O, 4 data shape.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import svgplot
from .dynamics import (
    ModelConfig,
    ModelVariant,
    NoiseConfig,
    integrate_master,
    initial_joint,
    sigma_z_expectation,
)
from .measures import (
    concurrence,
    correlation_report,
    infer_from_sigmaz,
    mutual_information,
)
from .protocols import (
    RESONANT_READOUT,
    boson_pair_to_qubits,
    estimate_from_counts,
    run_probe_cycle,
    run_qnd_sequence,
    sample_shots,
    transfer_time_report,
)
from .qcore import trace_distance
from .states import ProbePrep, one_param_density

MODEL_CHOICES = {
    "secii-qubit": ModelVariant.RESONANT_QUBIT,
    "secii-boson": ModelVariant.RESONANT_BOSON,
    "seciii-full": ModelVariant.DISPERSIVE_FULL,
    "seciii-eff": ModelVariant.DISPERSIVE_EFFECTIVE,
}

SWEEP_COLUMNS = (
    "concurrence",
    "mutual_info",
    "classical",
    "discord",
    "classical_eq20",
    "sigma_z",
)


class DataShapeError(Exception):
    """Input data does not have the shape a command requires."""


def fmt(v: float) -> str:
    """Serialize a float with 12 significant digits, locale independent."""
    return f"{float(v):.12g}"


# ---------------------------------------------------------------------------
# argument handling

def _add_common(p: argparse.ArgumentParser, *names: str) -> None:
    flags = {
        "x": dict(type=float, help="family parameter in [0.5, 1]"),
        "x-start": dict(type=float, help="sweep grid start (default 0.5)"),
        "x-stop": dict(type=float, help="sweep grid stop (default 1.0)"),
        "x-step": dict(type=float, help="sweep grid step (default 0.01)"),
        "gamma": dict(type=float, help="spontaneous emission rate in units of g"),
        "g": dict(type=float, help="coupling strength (default 1)"),
        "delta": dict(type=float, help="detuning in units of g"),
        "nmax": dict(type=int, help="boson truncation per cavity (default 2)"),
        "model": dict(choices=sorted(MODEL_CHOICES), help="model variant"),
        "t-end": dict(type=float, help="evolution time in units of 1/g"),
        "dt": dict(type=float, help="integrator step (default 1e-3)"),
        "shots": dict(type=int, help="shots per stage (0 = exact statistics)"),
        "seed": dict(type=int, help="sampling seed"),
        "out": dict(type=str, help="output file path"),
        "config": dict(type=str, help="JSON config file (flags win on conflict)"),
    }
    for name in names:
        p.add_argument(f"--{name}", default=None, **flags[name])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qprobe",
        description="Simulate probing of entanglement, discord and classical "
        "correlation of the one-parameter two-qubit family.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measures", help="all correlation measures of the family state")
    _add_common(p, "x", "out", "config")

    p = sub.add_parser("sweep", help="parameter sweep over x, CSV output")
    _add_common(p, "x-start", "x-stop", "x-step", "gamma", "g", "dt", "model",
                "nmax", "out", "config")
    p.add_argument("--emit-svg", action="store_true", default=None,
                   help="also render the correlation columns next to the CSV")

    p = sub.add_parser("evolve", help="time evolution of one configuration, CSV output")
    _add_common(p, "x", "model", "gamma", "g", "delta", "nmax", "t-end", "dt",
                "out", "config")
    p.add_argument("--samples", type=int, default=None,
                   help="number of sample times (default 201)")

    p = sub.add_parser("probe", help="single ground-probe readout cycle")
    _add_common(p, "x", "gamma", "g", "model", "nmax", "shots", "seed", "out", "config")
    p.add_argument("--n", type=int, default=None,
                   help="odd number of half periods (default 1)")

    p = sub.add_parser("qnd", help="non-demolition probe sequence")
    _add_common(p, "x", "g", "delta", "shots", "seed", "out", "config")
    p.add_argument("--cycles", type=int, default=None, help="full cycles (default 3)")
    p.add_argument("--report-tm", action="store_true", default=None,
                   help="also report fidelity at the delta*pi/g^2 candidate time")

    p = sub.add_parser("plot", help="render CSV columns as an SVG line chart")
    _add_common(p, "out", "config")
    p.add_argument("--csv", type=str, default=None, help="input CSV path")
    p.add_argument("--columns", type=str, default=None,
                   help="comma-separated column names to draw")

    return parser


def merged_options(args: argparse.Namespace, defaults: dict) -> dict:
    """Merge flag values over --config values over defaults."""
    from_file: dict = {}
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            try:
                from_file = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"bad config file: {exc}") from exc
        if not isinstance(from_file, dict):
            raise ValueError("config file must hold a JSON object")
    out = dict(defaults)
    for key in defaults:
        if key in from_file:
            out[key] = from_file[key]
    for key in defaults:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            out[key] = flag_val
    return out


def _require_x(opts: dict) -> float:
    x = opts.get("x")
    if x is None:
        raise ValueError("missing required parameter x")
    x = float(x)
    if not 0.5 <= x <= 1.0:
        raise ValueError("x out of family domain")
    return x


def _model_config(opts: dict) -> ModelConfig:
    variant = MODEL_CHOICES[opts["model"]]
    return ModelConfig(
        variant=variant,
        g=float(opts.get("g") or 1.0),
        delta=float(opts["delta"]) if opts.get("delta") is not None else None,
        n_max=int(opts.get("nmax") or 2),
    )


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# commands

def cmd_measures(args: argparse.Namespace) -> int:
    opts = merged_options(args, {"x": None, "out": None})
    x = _require_x(opts)
    rho = one_param_density(x)
    rep = correlation_report(rho)
    sigma_z = 3.0 - 4.0 * x
    values = {
        "x": x,
        "concurrence": rep.concurrence,
        "mutual_info": rep.mutual_info,
        "classical": rep.classical,
        "discord": rep.discord,
        "classical_eq20": rep.classical_closed_form,
        "sigma_z": sigma_z,
    }
    lines = [f"{k} = {fmt(v)}" for k, v in values.items()]
    print("\n".join(lines))
    if opts["out"]:
        _write_text(opts["out"], json.dumps({k: float(v) for k, v in values.items()},
                                            indent=2) + "\n")
    return 0


def _sweep_grid(start: float, stop: float, step: float) -> list[float]:
    if step <= 0:
        raise ValueError("step must be positive")
    if not (0.5 <= start <= stop <= 1.0):
        raise ValueError("x grid must lie inside [0.5, 1]")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(n)]


def _sweep_row(x: float, gamma: float, g: float, dt: float, cfg: ModelConfig) -> list[float]:
    rho = one_param_density(x)
    rep = correlation_report(rho)
    row = [
        x,
        rep.concurrence,
        rep.mutual_info,
        rep.classical,
        rep.discord,
        rep.classical_closed_form,
        3.0 - 4.0 * x,
    ]
    if gamma > 0.0:
        t_read = np.pi / (2.0 * g)
        joint0 = initial_joint(x, cfg, ProbePrep.GROUND)
        res = integrate_master(joint0, cfg, NoiseConfig(gamma=gamma * g), t_read, dt=dt)
        reduced = res.reduced_ab[-1]
        if cfg.variant is ModelVariant.RESONANT_BOSON:
            reduced = boson_pair_to_qubits(reduced)
        nrep = correlation_report(reduced)
        row += [
            nrep.concurrence,
            nrep.mutual_info,
            nrep.classical,
            nrep.discord,
            nrep.classical_closed_form,
            sigma_z_expectation(res.probe[-1]),
        ]
    return row


def cmd_sweep(args: argparse.Namespace) -> int:
    opts = merged_options(args, {
        "x_start": 0.5, "x_stop": 1.0, "x_step": 0.01,
        "gamma": 0.0, "g": 1.0, "dt": 1e-3,
        "model": "secii-qubit", "nmax": 2, "out": "sweep.csv",
        "emit_svg": False,
    })
    gamma = float(opts["gamma"])
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    cfg = _model_config({**opts, "delta": None})
    if cfg.variant not in (ModelVariant.RESONANT_QUBIT, ModelVariant.RESONANT_BOSON):
        raise ValueError("sweep runs on the resonant models")
    grid = _sweep_grid(float(opts["x_start"]), float(opts["x_stop"]),
                       float(opts["x_step"]))

    header = ["x", *SWEEP_COLUMNS]
    if gamma > 0:
        header += [f"{c}_noisy" for c in SWEEP_COLUMNS]

    workers = _thread_count()
    g = float(opts["g"])
    dt = float(opts["dt"])
    if workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda x: _sweep_row(x, gamma, g, dt, cfg), grid))
    else:
        rows = [_sweep_row(x, gamma, g, dt, cfg) for x in grid]

    text = ",".join(header) + "\n"
    for row in rows:
        text += ",".join(fmt(v) for v in row) + "\n"
    _write_text(opts["out"], text)
    print(f"wrote {len(rows)} rows to {opts['out']}")

    if opts["emit_svg"]:
        columns = ["discord", "classical"]
        if gamma > 0:
            columns += ["discord_noisy", "classical_noisy"]
        series = [
            (c, [row[header.index(c)] for row in rows]) for c in columns
        ]
        svg_path = str(opts["out"]).rsplit(".", 1)[0] + ".svg"
        _write_text(svg_path, svgplot.render_line_chart(grid, series, x_label="x"))
        print(f"wrote {svg_path}")
    return 0


def _thread_count() -> int:
    env = os.environ.get("QPROBE_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ValueError("QPROBE_THREADS must be an integer") from exc
        return max(1, n)
    return max(1, os.cpu_count() or 1)


def cmd_evolve(args: argparse.Namespace) -> int:
    opts = merged_options(args, {
        "x": None, "model": "secii-qubit", "gamma": 0.0, "g": 1.0,
        "delta": None, "nmax": 2, "t_end": 10.0, "dt": 1e-3,
        "samples": 201, "out": "evolve.csv",
    })
    x = _require_x(opts)
    cfg = _model_config(opts)
    gamma = float(opts["gamma"])
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    t_end = float(opts["t_end"])
    if t_end <= 0:
        raise ValueError("t-end must be positive")
    n_samples = int(opts["samples"])
    if n_samples < 2:
        raise ValueError("need at least two samples")

    joint0 = initial_joint(x, cfg, ProbePrep.GROUND)
    times = np.linspace(0.0, t_end, n_samples)
    res = integrate_master(joint0, cfg, NoiseConfig(gamma=gamma * cfg.g),
                           t_end, dt=float(opts["dt"]), sample_times=times)
    rho0 = one_param_density(x)
    lines = ["t,concurrence,mutual_info,sigma_z,p_excited,dist_to_initial"]
    for t, ab, pc in zip(res.times, res.reduced_ab, res.probe):
        if cfg.variant is ModelVariant.RESONANT_BOSON:
            ab = boson_pair_to_qubits(ab)
        lines.append(",".join(fmt(v) for v in (
            t,
            concurrence(ab),
            mutual_information(ab),
            sigma_z_expectation(pc),
            float(pc.mat[0, 0].real),
            trace_distance(ab.mat, rho0.mat),
        )))
    _write_text(opts["out"], "\n".join(lines) + "\n")
    print(f"wrote {len(res.times)} samples to {opts['out']}")
    return 0


def cmd_probe(args: argparse.Namespace) -> int:
    opts = merged_options(args, {
        "x": None, "gamma": 0.0, "g": 1.0, "model": "secii-qubit", "nmax": 2,
        "shots": 0, "seed": 0, "n": 1, "out": None,
    })
    x = _require_x(opts)
    cfg = _model_config({**opts, "delta": None})
    gamma = float(opts["gamma"])
    report = run_probe_cycle(x, cfg, int(opts["n"]),
                             NoiseConfig(gamma=gamma * cfg.g))
    inferred = infer_from_sigmaz(min(1.0, max(-1.0, report.mean_sigma_z)))
    out = {
        "t_read": report.t_read,
        "mean_sigma_z": report.mean_sigma_z,
        "x_hat": inferred.x_hat,
        "concurrence_hat": inferred.concurrence,
        "discord_hat": inferred.discord,
        "classical_hat": inferred.classical,
        "state_restored": report.state_restored,
        "post_distance_to_initial": trace_distance(
            report.post_state.mat, one_param_density(x).mat),
    }
    for name in ("concurrence", "mutual_info", "classical", "discord"):
        out[f"{name}_before"] = getattr(report.measures_before, name)
        out[f"{name}_after"] = getattr(report.measures_after, name)

    shots = int(opts["shots"])
    if shots > 0:
        p_e = 0.5 * (1.0 + report.mean_sigma_z)
        rec = sample_shots(min(1.0, max(0.0, p_e)), shots, int(opts["seed"]))
        est = estimate_from_counts([(RESONANT_READOUT, rec)])
        out["shots"] = shots
        out["count_excited"] = rec.count_excited
        out["x_hat_sampled"] = est.x_hat
        out["stderr"] = est.stderr
        out["ci99_lo"], out["ci99_hi"] = est.ci99

    for k, v in out.items():
        if isinstance(v, bool):
            print(f"{k} = {str(v).lower()}")
        elif isinstance(v, int):
            print(f"{k} = {v}")
        else:
            print(f"{k} = {fmt(v)}")
    if opts["out"]:
        serializable = {k: (v if isinstance(v, (bool, int)) else float(v))
                        for k, v in out.items()}
        _write_text(opts["out"], json.dumps(serializable, indent=2) + "\n")
    return 0


def cmd_qnd(args: argparse.Namespace) -> int:
    opts = merged_options(args, {
        "x": None, "g": 1.0, "delta": 10.0, "cycles": 3,
        "shots": 0, "seed": 7, "out": None, "report_tm": False,
    })
    x = _require_x(opts)
    cfg = ModelConfig(ModelVariant.DISPERSIVE_EFFECTIVE,
                      g=float(opts["g"]), delta=float(opts["delta"]))
    result = run_qnd_sequence(x, cfg, int(opts["cycles"]),
                              int(opts["shots"]), int(opts["seed"]))
    restoration = trace_distance(result.final_state.mat, one_param_density(x).mat)
    est = result.estimate
    print(f"x_hat = {fmt(est.x_hat)}")
    print(f"stderr = {fmt(est.stderr)}")
    print(f"ci99 = [{fmt(est.ci99[0])}, {fmt(est.ci99[1])}]")
    print(f"restoration_distance = {fmt(restoration)}")
    print(f"derived_concurrence = {fmt(est.derived.concurrence)}")
    print(f"derived_discord = {fmt(est.derived.discord)}")
    print(f"derived_classical = {fmt(est.derived.classical)}")
    if opts["report_tm"]:
        rep = transfer_time_report(cfg.j_exchange)
        print(f"transfer_time = {fmt(rep.best_time)}")
        print(f"transfer_fidelity = {fmt(rep.best_fidelity)}")
        print(f"candidate_time_dpig2 = {fmt(rep.candidate_time)}")
        print(f"candidate_fidelity = {fmt(rep.candidate_fidelity)}")
    if opts["out"]:
        lines = ["cycle,stage,prep,duration,p_excited,shots,count_excited"]
        for i, sr in enumerate(result.stages):
            lines.append(",".join([
                str(i // 2),
                str(i % 2),
                sr.stage.probe_prep.value,
                fmt(sr.stage.duration),
                fmt(sr.stage.outcome_p_excited),
                str(sr.shots.shots),
                str(sr.shots.count_excited),
            ]))
        _write_text(opts["out"], "\n".join(lines) + "\n")
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    opts = merged_options(args, {"csv": None, "columns": None, "out": "plot.svg"})
    if not opts["csv"]:
        raise ValueError("missing required --csv path")
    if not opts["columns"]:
        raise ValueError("missing required --columns list")
    with open(opts["csv"], "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 2:
        raise DataShapeError("CSV has no data rows")
    header = lines[0].split(",")
    wanted = [c.strip() for c in str(opts["columns"]).split(",") if c.strip()]
    if not wanted:
        raise ValueError("empty column list")
    for col in wanted:
        if col not in header:
            raise DataShapeError(f"missing column: {col}")
    idx = {c: header.index(c) for c in header}
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(header):
            raise DataShapeError("ragged CSV row")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise DataShapeError(f"non-numeric CSV cell: {exc}") from exc
    abscissa = [r[0] for r in rows]
    series = [(c, [r[idx[c]] for r in rows]) for c in wanted]
    svg = svgplot.render_line_chart(abscissa, series, x_label=header[0])
    _write_text(opts["out"], svg)
    print(f"wrote {opts['out']}")
    return 0


# ---------------------------------------------------------------------------

_COMMANDS = {
    "measures": cmd_measures,
    "sweep": cmd_sweep,
    "evolve": cmd_evolve,
    "probe": cmd_probe,
    "qnd": cmd_qnd,
    "plot": cmd_plot,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except DataShapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
