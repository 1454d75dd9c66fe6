"""Command line front end.

    seek <simulate|compare|lbs|avggap|certify> [--preset NAME | --config PATH]
         [--out DIR] [--jobs N]

Outputs go to --out when given, then the config's output.dir, then $SEEK_OUT,
then ./out. Exit codes: 0 success, 1 configuration problem, 2 numerical
abort, 3 certificate verdict false.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from .analysis import (
    averaging_gap,
    certify,
    convergence_time,
    decay_envelope,
    fit_decay,
    lbs_gains,
    vdot_sample,
)
from .config import ScenarioConfig, parse_config, preset_names
from .errors import ConfigError
from .sim import run_lbs, run_scenario

CONVERGENCE_RADIUS = 0.05  # meters
DECAY_WINDOW = 20.0  # seconds

# Gain sets lifted from hardware runs; simulation replays them unchanged,
# without the actuator limits the hardware imposed.
REPLAY_PRESETS = ("table2", "table3")
REPLAY_NOTE = "sim-replay of experimental parameters"


def _note_items(cfg: ScenarioConfig, tag: str | None = None) -> list:
    if cfg.name not in REPLAY_PRESETS:
        return []
    key = f"{tag}.note" if tag else "note"
    return [(key, REPLAY_NOTE)]


def _fmt(value) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_report(path: Path, items) -> None:
    with open(path, "w", newline="\n") as fh:
        for key, value in items:
            fh.write(f"{key} = {_fmt(value)}\n")


def _summary_items(tag: str, cfg: ScenarioConfig, traj):
    target = cfg.field.minimizer
    err = traj.error_norm(target)
    items = [
        (f"{tag}.scenario", cfg.name),
        *_note_items(cfg, tag),
        (f"{tag}.design", traj.meta["design"]),
        (f"{tag}.field", cfg.field.kind),
        (f"{tag}.t_end_s", traj.meta["t_end"]),
        (f"{tag}.samples", len(traj)),
        (f"{tag}.final_x_m", float(traj.x[-1])),
        (f"{tag}.final_y_m", float(traj.y[-1])),
        (f"{tag}.final_error_m", float(err[-1])),
        (f"{tag}.aborted", traj.aborted),
    ]
    if traj.aborted:
        items.append((f"{tag}.abort_time_s", traj.meta["abort"]["time"]))
        return items
    items.append(
        (
            f"{tag}.convergence_time_s",
            convergence_time(traj, target, CONVERGENCE_RADIUS),
        )
    )
    try:
        fit = fit_decay(
            traj, target, (0.0, min(DECAY_WINDOW, traj.meta["t_end"]))
        )
        items.append((f"{tag}.decay_rate_per_s", fit.rate))
        items.append((f"{tag}.decay_r_squared", fit.r_squared))
    except ValueError:
        items.append((f"{tag}.decay_rate_per_s", None))
    return items


def cmd_simulate(cfg: ScenarioConfig, out: Path, jobs: int) -> int:
    traj = run_scenario(cfg)
    traj.write_csv(out / "trajectory.csv")
    _write_report(out / "summary.txt", _summary_items("run", cfg, traj))
    return 2 if traj.aborted else 0


def cmd_compare(cfg: ScenarioConfig, out: Path, jobs: int) -> int:
    items = []
    code = 0
    for design, stem in (("third_order", "esc3"), ("first_order", "esc1")):
        traj = run_scenario(replace(cfg, design=design))
        traj.write_csv(out / f"{stem}_trajectory.csv")
        items.extend(_summary_items(stem, cfg, traj))
        if traj.aborted:
            code = 2
    _write_report(out / "compare.txt", items)
    return code


def cmd_lbs(cfg: ScenarioConfig, out: Path, jobs: int) -> int:
    params = cfg.params
    order = 3 if cfg.design == "third_order" else 1
    traj = run_lbs(
        cfg.field, params.omega, params.c, params.a, cfg.x0, cfg.y0, cfg.t_end
    )
    traj.write_csv(out / "lbs_trajectory.csv")
    target = cfg.field.minimizer
    window = (0.0, min(DECAY_WINDOW, cfg.t_end))
    items = [
        ("scenario", cfg.name),
        *_note_items(cfg),
        ("order", order),
        ("field", cfg.field.kind),
        ("t_end_s", traj.meta["t_end"]),
        ("final_error_m", float(traj.error_norm(target)[-1])),
    ]

    t_env, env = decay_envelope(traj, target, window, params.omega)
    with open(out / "envelope.csv", "w", newline="\n") as fh:
        fh.write("t,envelope_error\n")
        for tk, ek in zip(t_env, env):
            fh.write(f"{tk:.17g},{ek:.17g}\n")
    fit = fit_decay(traj, target, window, params.omega)
    items.append(("decay_rate_per_s", fit.rate))
    items.append(("decay_r_squared", fit.r_squared))

    if cfg.field.kind == "quartic" and order == 3:
        c1, c2 = lbs_gains(params.c, params.a, cfg.field.C1, cfg.field.C2)
        cert = certify(c1, c2, params.omega)
        items.extend(_certificate_items(cert))
        if cert.gamma_feasible is not None:
            report = vdot_sample(
                traj, target, c1, c2, params.omega, cert.gamma_feasible
            )
            items.append(("max_vdot", report.max_vdot))
            items.append(("vdot_samples", report.n_samples))
    else:
        items.append(("certificate", None))

    _write_report(out / "lbs_summary.txt", items)
    return 2 if traj.aborted else 0


def _sweep_config(cfg: ScenarioConfig, epsilon: float) -> ScenarioConfig:
    # Record four samples per dither period so the gap metric sees the
    # intra-period peaks, not just the phase the averaged system matches.
    return replace(
        cfg,
        params=replace(cfg.params, epsilon=epsilon),
        t_end=cfg.sweep_t_end,
        dt=None,
        record_every=50,
    )


def _gap_for_epsilon(args) -> tuple[float, float, bool]:
    cfg, epsilon = args
    traj, lbs = run_scenario(_sweep_config(cfg, epsilon), include_lbs=True)
    return epsilon, averaging_gap(traj, lbs), traj.aborted or lbs.aborted


def cmd_avggap(cfg: ScenarioConfig, out: Path, jobs: int) -> int:
    epsilons = sorted(cfg.sweep_epsilons, reverse=True)
    tasks = [(cfg, eps) for eps in epsilons]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_gap_for_epsilon, tasks))
    else:
        results = [_gap_for_epsilon(task) for task in tasks]
    results.sort(key=lambda r: -r[0])

    with open(out / "avggap.csv", "w", newline="\n") as fh:
        fh.write("epsilon,gap\n")
        for eps, gap, _ in results:
            fh.write(f"{eps:.17g},{gap:.17g}\n")
    gaps = [gap for _, gap, _ in results]
    decreasing = all(b < a for a, b in zip(gaps, gaps[1:]))
    _write_report(
        out / "avggap_summary.txt",
        [
            ("scenario", cfg.name),
            *_note_items(cfg),
            ("horizon_s", cfg.sweep_t_end),
            ("epsilons", ",".join(_fmt(e) for e, _, _ in results)),
            ("strictly_decreasing", decreasing),
        ],
    )
    return 2 if any(aborted for _, _, aborted in results) else 0


def _certificate_items(cert) -> list:
    return [
        ("c1", cert.c1),
        ("c2", cert.c2),
        ("omega_rad_s", cert.omega),
        ("k11", cert.k11),
        ("k12", cert.k12),
        ("k2", cert.k2),
        ("condition_branch", cert.condition_branch),
        ("omega_threshold_rad_s", cert.omega_threshold),
        ("gamma_feasible", cert.gamma_feasible),
        ("verdict", "pass" if cert.verdict else "fail"),
    ]


def cmd_certify(cfg: ScenarioConfig, out: Path, jobs: int) -> int:
    if cfg.field.kind != "quartic":
        raise ConfigError("certify requires field.kind = quartic")
    c1, c2 = lbs_gains(cfg.params.c, cfg.params.a, cfg.field.C1, cfg.field.C2)
    cert = certify(c1, c2, cfg.params.omega)
    _write_report(out / "certificate.txt", _note_items(cfg) + _certificate_items(cert))
    print(f"certificate: {'pass' if cert.verdict else 'fail'}")
    return 0 if cert.verdict else 3


COMMANDS = {
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "lbs": cmd_lbs,
    "avggap": cmd_avggap,
    "certify": cmd_certify,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seek",
        description="Model-free unicycle source seeking via Lie bracket averaging.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "run one closed-loop scenario"),
        ("compare", "run third- and first-order designs side by side"),
        ("lbs", "integrate the bracket system and report decay"),
        ("avggap", "sweep epsilon and report closed-loop vs bracket gaps"),
        ("certify", "evaluate the exponential-decay certificate"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        group = cmd.add_mutually_exclusive_group(required=True)
        group.add_argument("--preset", choices=preset_names(), help="named scenario")
        group.add_argument("--config", help="path to a key = value config file")
        cmd.add_argument("--out", help="output directory (default: $SEEK_OUT or ./out)")
        cmd.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
    return parser


def _resolve_out(args, cfg: ScenarioConfig) -> Path:
    if args.out:
        return Path(args.out)
    if cfg.out_dir:
        return Path(cfg.out_dir)
    return Path(os.environ.get("SEEK_OUT", "out"))


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as err:
        # argparse exits 2 on usage errors; fold that into the config code
        return 0 if err.code in (0, None) else 1
    try:
        cfg = parse_config(args.preset if args.preset else args.config)
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        out = _resolve_out(args, cfg)
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as err:
            raise ConfigError(f"cannot create output directory {out}: {err}") from None
        code = COMMANDS[args.command](cfg, out, args.jobs)
    except ConfigError as err:
        print(f"seek: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"seek: output error: {err}", file=sys.stderr)
        return 1
    except ValueError as err:
        print(f"seek: {err}", file=sys.stderr)
        return 1
    if code == 2:
        print("seek: run aborted on non-finite state", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
