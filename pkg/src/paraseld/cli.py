"""Command-line pipeline: scene synthesis, analysis, evaluation.

    paraseld synth SPEC --out DIR            scene WAV + reference CSVs
    paraseld analyze WAV --out DIR           metadata CSVs + per-event WAVs
    paraseld eval EST_FRAMES REF_FRAMES      metric report

Exit codes: 0 on success, 2 on usage or input errors.  Every invocation
writes a run manifest (inputs, config, stage timings, version) to the
output directory.
"""

from __future__ import annotations

import argparse
import json
import shlex
import subprocess
import sys
import time
from pathlib import Path

from . import __version__
from .association import emit_metadata
from .config import FrontEndParams, load_params
from .frontend import ParametricFrontEnd
from .io import (dump_plane, read_frame_csv, read_predictions_csv,
                 read_wav_ambisonic, write_event_csv, write_frame_csv,
                 write_wav, INTERNAL_TO_ACN)
from .metrics import FrameLabels, evaluate
from .scene import parse_scene_file, synthesize


class _Stages:
    def __init__(self):
        self.timings_ms = {}
        self._t0 = None
        self._name = None

    def start(self, name):
        self.stop()
        self._name, self._t0 = name, time.perf_counter()

    def stop(self):
        if self._name is not None:
            self.timings_ms[self._name] = round(
                (time.perf_counter() - self._t0) * 1000.0, 3)
            self._name = None


def _write_manifest(out_dir, command, inputs, config_path, stages):
    manifest = {
        "tool": "paraseld",
        "version": __version__,
        "command": command,
        "inputs": {k: str(v) for k, v in inputs.items()},
        "output_dir": str(out_dir),
        "config": str(config_path) if config_path else None,
        "timings_ms": stages.timings_ms,
    }
    with open(Path(out_dir) / "run_manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _params(args):
    if args.config:
        return load_params(args.config)
    return FrontEndParams()


def cmd_synth(args):
    stages = _Stages()
    stages.start("parse")
    spec = parse_scene_file(args.spec)
    params = _params(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stages.start("synthesize")
    buf, refs = synthesize(spec, frame_hop_s=params.frame_hop_s)
    stages.start("write")
    # deliver in the ACN/SN3D WAV convention analyze expects by default
    acn = buf.samples[:, INTERNAL_TO_ACN].copy()
    acn[:, 1:4] /= 3 ** 0.5
    write_wav(out / "scene.wav", acn, buf.sample_rate_hz)
    event_rows, frame_rows = emit_metadata(refs, params)
    write_event_csv(out / "scene_ref_events.csv", event_rows)
    write_frame_csv(out / "scene_ref_frames.csv", frame_rows)
    stages.stop()
    _write_manifest(out, "synth", {"spec": args.spec}, args.config, stages)
    print(f"wrote scene.wav + reference CSVs ({len(refs)} events) to {out}")
    return 0


def _run_classifier_hook(command, out_dir, events):
    """Invoke the external classifier on the event WAVs and apply its labels."""
    argv = shlex.split(command) + [str(out_dir)]
    proc = subprocess.run(argv, capture_output=True, text=True)
    if proc.returncode != 0:
        raise RuntimeError(
            f"classifier hook failed ({proc.returncode}): {proc.stderr.strip()}")
    for event_id, class_id, _prob in read_predictions_csv(
            Path(out_dir) / "predictions.csv"):
        if 0 <= event_id < len(events):
            events[event_id].class_id = class_id


def cmd_analyze(args):
    stages = _Stages()
    stages.start("load")
    buf = read_wav_ambisonic(args.wav, channel_order=args.channel_order,
                             normalization=args.norm)
    params = _params(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    front_end = ParametricFrontEnd.from_params(params)
    stages.start("analyze")
    result = front_end.analyze(buf)
    stages.start("beamform")
    beams = front_end.beamform_events(buf, result.events)
    stages.start("write")
    for idx, mono in enumerate(beams):
        write_wav(out / f"event_{idx}.wav", mono, params.sample_rate_hz)
    event_rows, frame_rows = emit_metadata(result.events, params)
    write_event_csv(out / "est_events.csv", event_rows)
    write_frame_csv(out / "est_frames.csv", frame_rows)
    if args.dump_planes:
        planes = out / "planes"
        planes.mkdir(exist_ok=True)
        doa = result.doa_map
        for name, plane in [("azimuth", doa.azimuth), ("elevation", doa.elevation),
                            ("energy", doa.energy), ("diffuseness", doa.diffuseness),
                            ("valid", doa.valid)]:
            dump_plane(planes / f"{name}.bin", name, plane)
    if args.classifier_cmd:
        stages.start("classify")
        _run_classifier_hook(args.classifier_cmd, out, result.events)
        event_rows, frame_rows = emit_metadata(result.events, params)
        write_event_csv(out / "est_events.csv", event_rows)
        write_frame_csv(out / "est_frames.csv", frame_rows)
    stages.stop()
    _write_manifest(out, "analyze", {"wav": args.wav}, args.config, stages)
    print(f"detected {len(result.events)} event(s); outputs in {out}")
    return 0


def cmd_eval(args):
    stages = _Stages()
    stages.start("evaluate")
    params = _params(args)
    est = FrameLabels.from_rows(read_frame_csv(args.est_frames))
    ref = FrameLabels.from_rows(read_frame_csv(args.ref_frames))
    frames_per_segment = max(1, int(round(1.0 / params.frame_hop_s)))
    report = evaluate(est, ref, frames_per_segment)
    stages.stop()
    for line in report.lines():
        print(line)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "metrics.txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(report.lines()) + "\n")
    with open(out / "metrics.csv", "w", encoding="utf-8") as fh:
        fh.write("er,f,doa_deg,fr,seld\n")
        fh.write(report.csv_line() + "\n")
    _write_manifest(out, "eval",
                    {"est_frames": args.est_frames, "ref_frames": args.ref_frames},
                    args.config, stages)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="paraseld",
        description="Parametric SELD front-end for first-order ambisonics")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="synthesize a scene from a spec file")
    p_synth.add_argument("spec", help="scene spec file")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.add_argument("--config", default=None, help="front-end config file")
    p_synth.set_defaults(func=cmd_synth)

    p_an = sub.add_parser("analyze", help="detect and localize events in a WAV")
    p_an.add_argument("wav", help="4-channel ambisonic WAV")
    p_an.add_argument("--out", required=True, help="output directory")
    p_an.add_argument("--config", default=None, help="front-end config file")
    p_an.add_argument("--channel-order", choices=("acn", "wxyz"), default="acn")
    p_an.add_argument("--norm", choices=("sn3d", "n3d"), default="sn3d")
    p_an.add_argument("--dump-planes", action="store_true",
                      help="dump analysis planes as binary matrices")
    p_an.add_argument("--classifier-cmd", default=None,
                      help="external classifier command; receives the output "
                           "directory and must write predictions.csv there")
    p_an.set_defaults(func=cmd_analyze)

    p_ev = sub.add_parser("eval", help="score estimated against reference frames")
    p_ev.add_argument("est_frames", help="estimated frame-level CSV")
    p_ev.add_argument("ref_frames", help="reference frame-level CSV")
    p_ev.add_argument("--out", default=".", help="directory for the report files")
    p_ev.add_argument("--config", default=None, help="front-end config file")
    p_ev.set_defaults(func=cmd_eval)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"paraseld {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
