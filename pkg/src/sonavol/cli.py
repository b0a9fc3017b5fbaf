"""Command-line interface.

Every subcommand prints a JSON payload on stdout and exits 0; failures
print {"error": {"stage": ..., "message": ...}} and exit nonzero, so
scripted experiments can always tell where a run died.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import audio_io, mask_io
from .channel import Channel, scenario_from_geometry, simulate_channel
from .geometry import meters_per_pixel
from .mls import generate_mls
from .pipeline import PipelineConfig, StageError, load_config, run_pipeline
from .ranging import EchoTrace, RangingError, range_with_retry
from .volumetry import estimate_volume, side_profile, synth_solid, top_area

__all__ = ["main", "build_parser"]


def _load_pipeline_config(args) -> PipelineConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return PipelineConfig()


def _load_trace(path, role: str) -> EchoTrace:
    samples, rate = audio_io.read_wav(path)
    return EchoTrace(samples=samples, sample_rate=rate, role=role)


def cmd_mls_gen(args) -> dict:
    seq = generate_mls(args.order, taps=args.taps)
    audio_io.write_wav(args.out, seq.samples.astype(float), sample_rate=args.rate)
    return {
        "order": seq.order,
        "taps": list(seq.taps),
        "length": len(seq),
        "sample_rate": args.rate,
        "out": str(args.out),
    }


def cmd_range_sim(args) -> dict:
    config = _load_pipeline_config(args)
    ref_samples, rate = audio_io.read_wav(args.ref)
    ranging_cfg = config.ranging
    if ranging_cfg.sample_rate != rate:
        from dataclasses import replace

        ranging_cfg = replace(ranging_cfg, sample_rate=rate)
    channel = scenario_from_geometry(
        args.height,
        ranging_cfg,
        echo_gain=args.echo_gain,
        noise_snr_db=args.snr,
    )
    trace = simulate_channel(ref_samples, channel, args.seed, fractional=args.fractional)
    audio_io.write_wav(args.out, trace.samples, sample_rate=int(rate))
    payload = channel.to_dict()
    payload.update({
        "height_m": args.height,
        "seed": args.seed,
        "fractional": args.fractional,
        "samples": len(trace),
        "out": str(args.out),
    })
    return payload


def cmd_range_est(args) -> dict:
    config = _load_pipeline_config(args)
    recorded = _load_trace(args.recorded, "recorded")
    reference = _load_trace(args.ref, "reference")
    ranging_cfg = config.ranging
    if ranging_cfg.sample_rate != recorded.sample_rate:
        from dataclasses import replace

        ranging_cfg = replace(ranging_cfg, sample_rate=recorded.sample_rate)
    estimate = range_with_retry(iter([recorded]), reference, ranging_cfg)
    return {
        "height_m": estimate.height,
        "round_trip_path_m": estimate.round_trip_path,
        "attempts": estimate.attempts_used,
        "elapsed_s": estimate.elapsed_retry_time,
    }


def cmd_scale(args) -> dict:
    config = _load_pipeline_config(args)
    scale = meters_per_pixel(args.height, config.camera)
    return {
        "image_width_m": scale.image_physical_width,
        "meters_per_pixel": scale.meters_per_pixel,
    }


def cmd_volume(args) -> dict:
    config = _load_pipeline_config(args)
    scale = meters_per_pixel(args.height, config.camera)
    top = mask_io.read_mask(args.top, view="top")
    side = mask_io.read_mask(args.side, view="side")
    s_real, top_width = top_area(top, scale)
    profile = side_profile(side)
    report = estimate_volume(s_real, top_width, profile, args.side_scale)
    return {
        "container": args.container or config.container,
        "height_m": args.height,
        "meters_per_pixel": scale.meters_per_pixel,
        "top_area_m2": report.top_area,
        "top_width_m": report.top_width,
        "side_rows": profile.rows,
        "side_scale_m": report.side_scale,
        "calibration_mode": report.calibration_mode,
        "volume_m3": report.volume,
    }


def cmd_oracle(args) -> dict:
    radius = args.radius if args.radius is not None else args.grid / 4
    height = args.height_px if args.height_px is not None else args.grid / 2
    top, side, true_volume = synth_solid(args.shape, radius, height, args.grid, scale=args.scale)
    s_real, top_width = top_area(top, args.scale)
    profile = side_profile(side)
    report = estimate_volume(s_real, top_width, profile)
    return {
        "shape": args.shape,
        "radius_px": radius,
        "height_px": height,
        "grid": args.grid,
        "scale_m_per_px": args.scale,
        "model_volume_m3": report.volume,
        "voxel_volume_m3": true_volume,
        "relative_difference": report.volume / true_volume - 1.0,
    }


def cmd_pipeline(args) -> dict:
    config = _load_pipeline_config(args)
    if args.container:
        from dataclasses import replace

        config = replace(config, container=args.container)
    recorded = _load_trace(args.recorded, "recorded")
    reference = _load_trace(args.ref, "reference")
    top = mask_io.read_mask(args.top, view="top")
    side = mask_io.read_mask(args.side, view="side")
    return run_pipeline(config, recorded, reference, top, side)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sonavol",
        description="Echo ranging with maximum length sequences and two-view volume estimation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (camera, ranging, mls, container)")

    mls_p = sub.add_parser("mls", help="sequence generation")
    mls_sub = mls_p.add_subparsers(dest="subcommand", required=True)
    gen = mls_sub.add_parser("gen", parents=[common], help="write one MLS period as WAV")
    gen.add_argument("--order", type=int, required=True)
    gen.add_argument("--taps", type=int, nargs="+", default=None)
    gen.add_argument("--rate", type=int, default=48000)
    gen.add_argument("-o", "--out", required=True)
    gen.set_defaults(func=cmd_mls_gen, stage="mls")

    range_p = sub.add_parser("range", help="echo ranging")
    range_sub = range_p.add_subparsers(dest="subcommand", required=True)
    sim = range_sub.add_parser("sim", parents=[common], help="simulate a recording")
    sim.add_argument("--height", type=float, required=True)
    sim.add_argument("--snr", type=float, default=None, help="SNR in dB; omit for noiseless")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--echo-gain", type=float, default=0.5)
    sim.add_argument("--fractional", action="store_true", help="sub-sample path delays")
    sim.add_argument("--ref", required=True)
    sim.add_argument("-o", "--out", required=True)
    sim.set_defaults(func=cmd_range_sim, stage="channel_sim")

    est = range_sub.add_parser("est", parents=[common], help="estimate height from a recording")
    est.add_argument("--recorded", required=True)
    est.add_argument("--ref", required=True)
    est.set_defaults(func=cmd_range_est, stage="ranging")

    scale_p = sub.add_parser("scale", parents=[common], help="meters-per-pixel from a height")
    scale_p.add_argument("--height", type=float, required=True)
    scale_p.set_defaults(func=cmd_scale, stage="geometry")

    vol = sub.add_parser("volume", parents=[common], help="volume from two masks and a height")
    vol.add_argument("--top", required=True)
    vol.add_argument("--side", required=True)
    vol.add_argument("--height", type=float, required=True)
    vol.add_argument("--container", choices=["plate", "bowl"], default=None)
    vol.add_argument("--side-scale", type=float, default=None)
    vol.set_defaults(func=cmd_volume, stage="volumetry")

    oracle = sub.add_parser("oracle", parents=[common], help="stacked-slab model vs voxel counting")
    oracle.add_argument("--shape", choices=["cylinder", "cone", "hemisphere", "ellipsoid-cap"], required=True)
    oracle.add_argument("--grid", type=int, default=512)
    oracle.add_argument("--radius", type=float, default=None)
    oracle.add_argument("--height-px", type=float, default=None)
    oracle.add_argument("--scale", type=float, default=1.0e-3)
    oracle.set_defaults(func=cmd_oracle, stage="volumetry")

    pipe = sub.add_parser("pipeline", parents=[common], help="full sensing-files-to-volume run")
    pipe.add_argument("--recorded", required=True)
    pipe.add_argument("--ref", required=True)
    pipe.add_argument("--top", required=True)
    pipe.add_argument("--side", required=True)
    pipe.add_argument("--container", choices=["plate", "bowl"], default=None)
    pipe.set_defaults(func=cmd_pipeline, stage="pipeline")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        payload = args.func(args)
    except StageError as exc:
        print(json.dumps({"error": {"stage": exc.stage, "message": exc.message}}, indent=2))
        return 2
    except (RangingError, ValueError, OSError) as exc:
        print(json.dumps({"error": {"stage": args.stage, "message": str(exc)}}, indent=2))
        return 1
    print(json.dumps(payload, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
