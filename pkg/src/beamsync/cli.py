"""Command-line front end: sweep | crb | trial | drift.

Every file-producing command writes a `manifest` next to its results: the
fully resolved config snapshot plus a [run] section (tool version, seed,
fingerprint, duration, output list).  A manifest is itself a valid config,
so re-running a command on a manifest reproduces the result files byte for
byte.

Exit codes: 0 success, 1 config error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import ConfigError, ExperimentConfig, config_fingerprint, dump_config, parse_config
from .crb import crb_closed_form, crb_numerical
from .montecarlo import (
    build_channel,
    run_sweep,
    run_trial,
    simulate_drift_timeline,
    trial_rng,
)
from .protocol import SCHEMES, genie_beam_direction
from .signals import make_orthonormal_pilots, make_sync_signal
from .channels import channel_to_csv

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_bytes(text.encode("utf-8"))
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _write_outputs(out_dir: Path, files: dict[str, str], cfg: ExperimentConfig,
                   started: float) -> None:
    """Write result files plus the manifest; remove partial output on failure."""
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = _manifest_text(cfg, sorted(files), started)
    written = []
    try:
        for name, text in files.items():
            _atomic_write(out_dir / name, text)
            written.append(out_dir / name)
        _atomic_write(out_dir / "manifest", manifest)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise


def _manifest_text(cfg: ExperimentConfig, outputs: list[str], started: float) -> str:
    lines = [
        "[run]",
        f"tool = beamsync {__version__}",
        f"master_seed = {cfg.master_seed}",
        f"config_sha256 = {config_fingerprint(cfg)}",
        f"duration_seconds = {time.monotonic() - started!r}",
        f"created_utc = {datetime.now(timezone.utc).isoformat()}",
        f"outputs = {','.join(outputs)}",
        "",
    ]
    return "\n".join(lines) + dump_config(cfg)


def _scheme_summary(curve, scheme: str) -> str:
    lines = [f"scheme: {scheme}", "snr_db      rmse          sqrt(crb) avg"]
    for p in curve.scheme_points(scheme):
        lines.append(f"{p.snr_db:8.2f}  {p.rmse:.6e}  {p.crb_sqrt_avg:.6e}")
    return "\n".join(lines) + "\n"


def cmd_sweep(config_path: str, output_dir: str, workers: int = 1) -> int:
    """Run the configured RMSE sweep and write rmse.csv plus summaries."""
    cfg = parse_config(config_path)
    started = time.monotonic()
    curve = run_sweep(cfg, workers=workers)
    files = {"rmse.csv": curve.to_csv_text()}
    for scheme in cfg.schemes:
        files[f"summary_{scheme}.txt"] = _scheme_summary(curve, scheme)
    _write_outputs(Path(output_dir), files, cfg, started)
    print(f"wrote {len(files)} result file(s) to {output_dir}")
    return EXIT_OK


def cmd_crb(config_path: str) -> int:
    """Print closed-form vs numerically inverted bound over the SNR grid."""
    cfg = parse_config(config_path)
    waveform = make_sync_signal(cfg.n, cfg.cycles, cfg.leading_one)
    rng = trial_rng(cfg.master_seed, 0, 0, 0)
    channel = build_channel(cfg, rng)
    b = channel.entries.T @ genie_beam_direction(channel).weights
    max_dev = 0.0
    print("snr_db,crb_closed_form,crb_numerical,relative_deviation")
    for snr_db in cfg.snr_grid_db:
        rho = 10.0 ** (snr_db / 10.0)
        closed = crb_closed_form(waveform, b, rho)
        numeric = crb_numerical(waveform, b, rho)
        dev = abs(numeric - closed) / closed
        max_dev = max(max_dev, dev)
        print(f"{snr_db!r},{closed!r},{numeric!r},{dev:.3e}")
    print(f"max_relative_deviation = {max_dev:.3e}")
    return EXIT_OK


def cmd_trial(config_path: str, scheme: str, snr_db: float | None, seed: int | None,
              trial_index: int = 0, dump_channel: str | None = None) -> int:
    """Run one protocol round and print its outcome as key = value lines.

    The round uses the same per-trial stream derivation as a sweep, so with
    matching (seed, scheme, SNR grid position, trial index) the printed
    values coincide with that sweep trial.
    """
    cfg = parse_config(config_path)
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}; expected one of {list(SCHEMES)}",
                          path=config_path)
    if snr_db is None:
        snr_db = cfg.snr_grid_db[0]
    if snr_db not in cfg.snr_grid_db:
        raise ConfigError(f"--snr-db {snr_db} is not on the config grid "
                          f"{list(cfg.snr_grid_db)}", path=config_path)
    snr_index = cfg.snr_grid_db.index(snr_db)
    master_seed = cfg.master_seed if seed is None else seed
    rng = trial_rng(master_seed, scheme, snr_index, trial_index)
    rho = 10.0 ** (snr_db / 10.0)
    pilots = make_orthonormal_pilots(cfg.tau_p, cfg.ms)
    waveform = make_sync_signal(cfg.n, cfg.cycles, cfg.leading_one)
    # drawing the channel here first consumes the stream exactly as a sweep
    # trial would, so the printed values match that trial
    channel = build_channel(cfg, rng)
    result = run_trial(cfg, scheme, rho, rng, pilots=pilots, waveform=waveform,
                       channel=channel)
    if dump_channel:
        Path(dump_channel).write_text(channel_to_csv(channel), encoding="utf-8")
    print(f"scheme = {result.scheme}")
    print(f"snr_db = {result.snr_db!r}")
    print(f"trial_index = {trial_index}")
    print(f"master_seed = {master_seed}")
    print(f"delta_true = {result.delta_true!r}")
    print(f"delta_hat = {result.delta_hat!r}")
    print(f"abs_error = {abs(result.delta_hat - result.delta_true)!r}")
    print(f"squared_error = {result.squared_error!r}")
    print(f"beam_alignment = {result.beam_alignment!r}")
    print(f"objective_value = {result.objective_value!r}")
    print(f"crb = {result.crb!r}")
    print(f"valid = {str(result.valid).lower()}")
    return EXIT_OK


def cmd_drift(config_path: str, output_dir: str) -> int:
    """Simulate the drift / re-sync timeline and write drift.csv."""
    cfg = parse_config(config_path)
    started = time.monotonic()
    rng = trial_rng(cfg.master_seed, 0, 0, 0)
    timeline = simulate_drift_timeline(cfg, cfg.drift.drift_rate,
                                       cfg.drift.resync_threshold,
                                       cfg.drift.slots, rng)
    _write_outputs(Path(output_dir), {"drift.csv": timeline.to_csv_text()}, cfg, started)
    print(f"{timeline.sync_count} sync event(s) over {cfg.drift.slots} slot(s); "
          f"wrote drift.csv to {output_dir}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamsync",
        description="Carrier-frequency sync simulator for distributed antenna panels")
    parser.add_argument("--version", action="version", version=f"beamsync {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run an RMSE-vs-SNR sweep")
    p.add_argument("config")
    p.add_argument("output_dir")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("crb", help="evaluate the offset bound on the SNR grid")
    p.add_argument("config")

    p = sub.add_parser("trial", help="run and print a single protocol round")
    p.add_argument("config")
    p.add_argument("--scheme", default="BeamSync", choices=SCHEMES)
    p.add_argument("--snr-db", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trial-index", type=int, default=0)
    p.add_argument("--dump-channel", default=None, metavar="FILE",
                   help="also write the realized channel as re,im CSV")

    p = sub.add_parser("drift", help="simulate the drift / re-sync timeline")
    p.add_argument("config")
    p.add_argument("output_dir")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "sweep":
            return cmd_sweep(args.config, args.output_dir, workers=args.workers)
        if args.command == "crb":
            return cmd_crb(args.config)
        if args.command == "trial":
            return cmd_trial(args.config, args.scheme, args.snr_db, args.seed,
                             args.trial_index, args.dump_channel)
        if args.command == "drift":
            return cmd_drift(args.config, args.output_dir)
        raise RuntimeError(f"unhandled command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
