"""Command-line front end.

Commands: beats, motion, align, render, eval, run. Exit codes: 0 success,
2 bad input (files, flags, schemas), 3 processing failure. All JSON
artifacts are byte-stable across reruns.
"""

import argparse
import shutil
import sys
from pathlib import Path

from .align import RetimingMap, build_retiming, match
from .config import PipelineConfig
from .errors import InputError, PipelineError
from .io import frames as frames_io
from .io import jsonfmt
from .io.plans import beats_from_dict, beats_to_dict, peaks_from_dict, \
    peaks_to_dict, plan_to_dict, read_plan, write_plan
from .io.wav import load_wav
from .metrics import evaluate
from .pipeline import analyze_beats, analyze_motion, render_retiming, \
    run_pipeline


def _emit(doc: dict, out_path: str | None) -> None:
    text = jsonfmt.dumps(doc)
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _config_from_args(args) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    for name in vars(cfg):
        flag = getattr(args, name, None)
        if flag is not None:
            setattr(cfg, name, flag)
    return cfg.validate()


def _add_audio_flags(p):
    p.add_argument("--n-fft", dest="n_fft", type=int)
    p.add_argument("--hop", dest="hop", type=int)
    p.add_argument("--n-mels", dest="n_mels", type=int)
    p.add_argument("--bpm-min", dest="bpm_min", type=float)
    p.add_argument("--bpm-max", dest="bpm_max", type=float)
    p.add_argument("--prior-bpm", dest="prior_bpm", type=float)
    p.add_argument("--tightness", dest="tightness", type=float)


def _add_motion_flags(p):
    p.add_argument("--sigma-frames", dest="sigma_frames", type=float)
    p.add_argument("--min-distance", dest="min_distance_frames", type=int)
    p.add_argument("--threshold-rel", dest="threshold_rel", type=float)


def cmd_beats(args) -> int:
    cfg = _config_from_args(args)
    grid = analyze_beats(load_wav(args.audio), cfg)
    _emit(beats_to_dict(grid), args.output)
    return 0


def cmd_motion(args) -> int:
    cfg = _config_from_args(args)
    video = frames_io.load_frames(args.video)
    energy, _, peaks = analyze_motion(video, cfg,
                                      apply_smoothing=not args.no_smooth)
    _emit(peaks_to_dict(peaks, energy=energy.values), args.output)
    return 0


def cmd_align(args) -> int:
    cfg = _config_from_args(args)
    beats = beats_from_dict(jsonfmt.load(args.beats))
    peaks = peaks_from_dict(jsonfmt.load(args.peaks))
    plan = match(beats, peaks, eq1_strict=cfg.eq1_strict)
    _emit(plan_to_dict(plan), args.output)
    if args.retime:
        if not args.video:
            raise InputError("--retime needs --video to size the map")
        video = frames_io.load_frames(args.video)
        retiming = build_retiming(plan, video, beats.duration, cfg.output_fps)
        write_plan(retiming, args.retime)
    return 0


def cmd_render(args) -> int:
    cfg = _config_from_args(args)
    video = frames_io.load_frames(args.video)
    retiming = read_plan(args.retime)
    if not isinstance(retiming, RetimingMap):
        raise InputError(f"{args.retime} does not hold a retiming map")
    rendered = render_retiming(retiming, video, cfg, command=args.command,
                               job_dir=args.job_dir)
    frames_io.save_frames(rendered, args.output)
    return 0


def cmd_eval(args) -> int:
    cfg = _config_from_args(args)
    output = frames_io.load_frames(args.video)
    source = frames_io.load_frames(args.source)
    beats = beats_from_dict(jsonfmt.load(args.beats))
    _, _, rendered_peaks = analyze_motion(output, cfg)
    report = evaluate(beats, rendered_peaks, output, source,
                      sigma=cfg.beat_align_sigma, over=cfg.beat_align_over)
    _emit(report.to_dict(), args.output)
    return 0


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    if cfg.backend == "external" and not args.command:
        raise InputError("--backend external needs --command")
    video = frames_io.load_frames(args.video)
    audio = load_wav(args.audio)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    created: list[Path] = []
    try:
        job_dir = args.job_dir or str(out_dir / "jobs")
        beats, peaks, segments, output, report = run_pipeline(
            video, audio, cfg, segment_seconds=args.segment_seconds,
            command=args.command, job_dir=job_dir)

        beats_path = out_dir / "beats.json"
        jsonfmt.dump(beats_to_dict(beats), beats_path)
        created.append(beats_path)
        if len(segments) == 1:
            pairs = [(out_dir / "plan.json", out_dir / "retime.json",
                      segments[0])]
        else:
            pairs = [(out_dir / f"plan_{i:03d}.json",
                      out_dir / f"retime_{i:03d}.json", seg)
                     for i, seg in enumerate(segments)]
        for plan_path, retime_path, seg in pairs:
            write_plan(seg.plan, plan_path)
            write_plan(seg.retiming, retime_path)
            created.extend([plan_path, retime_path])

        frames_dir = out_dir / "frames"
        created.append(frames_dir)  # before writing, so partials get removed
        frames_io.save_frames(output, frames_dir)
        report_path = out_dir / "report.json"
        jsonfmt.dump(report.to_dict(), report_path)
        created.append(report_path)
    except Exception:
        for path in created:  # do not leave half-written artifacts behind
            if path.is_dir():
                shutil.rmtree(path, ignore_errors=True)
            else:
                path.unlink(missing_ok=True)
        raise
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mvaa",
        description="Retime a video so its motion peaks land on music beats.")
    parser.add_argument("--config", help="JSON file of pipeline settings")
    sub = parser.add_subparsers(dest="command_name", required=True)

    p = sub.add_parser("beats", help="extract a beat grid from a WAV file")
    p.add_argument("audio")
    p.add_argument("-o", "--output")
    _add_audio_flags(p)
    p.set_defaults(func=cmd_beats)

    p = sub.add_parser("motion", help="extract motion peaks from a video")
    p.add_argument("video")
    p.add_argument("-o", "--output")
    p.add_argument("--no-smooth", action="store_true",
                   help="skip Gaussian smoothing (peak picking will refuse)")
    _add_motion_flags(p)
    p.set_defaults(func=cmd_motion)

    p = sub.add_parser("align", help="match beats to peaks")
    p.add_argument("beats")
    p.add_argument("peaks")
    p.add_argument("-o", "--output")
    p.add_argument("--retime", help="also write a retiming map here")
    p.add_argument("--video", help="source video (needed for --retime)")
    p.add_argument("--eq1-strict", dest="eq1_strict", action="store_const",
                   const=True)
    p.add_argument("--output-fps", dest="output_fps", type=float)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("render", help="render a retiming map")
    p.add_argument("video")
    p.add_argument("retime")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--backend", dest="backend")
    p.add_argument("--blend", dest="blend", action="store_const", const=True)
    p.add_argument("--command", help="external backend executable")
    p.add_argument("--job-dir", help="working directory for external jobs")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("eval", help="score a rendered video")
    p.add_argument("video", help="rendered output")
    p.add_argument("--source", required=True)
    p.add_argument("--beats", required=True)
    p.add_argument("-o", "--output")
    p.add_argument("--beat-align-sigma", dest="beat_align_sigma", type=float)
    p.add_argument("--beat-align-over", dest="beat_align_over",
                   choices=("beats", "peaks"))
    _add_motion_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("run", help="full pipeline: analyze, align, render")
    p.add_argument("video")
    p.add_argument("audio")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--backend", dest="backend")
    p.add_argument("--blend", dest="blend", action="store_const", const=True)
    p.add_argument("--eq1-strict", dest="eq1_strict", action="store_const",
                   const=True)
    p.add_argument("--output-fps", dest="output_fps", type=float)
    p.add_argument("--segment-seconds", type=float)
    p.add_argument("--command", help="external backend executable")
    p.add_argument("--job-dir")
    p.add_argument("--beat-align-sigma", dest="beat_align_sigma", type=float)
    p.add_argument("--beat-align-over", dest="beat_align_over",
                   choices=("beats", "peaks"))
    _add_audio_flags(p)
    _add_motion_flags(p)
    p.set_defaults(func=cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"mvaa: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"mvaa: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"mvaa: {exc}", file=sys.stderr)
        return 2
    except PipelineError as exc:
        print(f"mvaa: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"mvaa: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
