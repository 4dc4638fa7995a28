"""
Command-Line Interface
Subcommands binding the pipeline end to end: synth, fit, render, cfar,
gradcheck, eval, export and sweep.

Exit codes: 0 success, 1 I/O or file format error (or a failed
gradcheck), 2 configuration error, 3 fit failure, 4 metric or shape error.
Logs go to stderr; stdout carries only --help and --version.
"""

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Dict, List, Optional

import torch
from loguru import logger

from src import __version__
from src.cfar.detector import CfarConfig, ca_cfar
from src.cfar.pointcloud_io import save_pointcloud
from src.core.config import DEFAULT_CONFIG_PATH, configure_logging, load_config, merge_config, save_yaml
from src.core.exceptions import (
    ConfigError, DomainError, FitError, HeatmapFormatError, HeatmapWriteError,
    MetricError, SceneError, ShapeError,
)
from src.core.heatmap_io import heatmap_read, heatmap_write
from src.core.skeleton import load_skeleton
from src.core.types import HeatmapGrid, RadarParams
from src.dipr.initialization import InitConfig
from src.dipr.serialization import load_frame, save_frame
from src.evaluation.metrics import PoseMetrics, load_pose_sequence
from src.fitter.fitter import MGSFitter
from src.fitter.sweep import SWEEP_PARAMETERS, parse_sweep_values, sweep_from_config
from src.grad.check import GradcheckConfig, gradcheck
from src.losses.weights import LossWeights
from src.renderer.kernels import RenderKernelParams
from src.renderer.render import render
from src.synth.generator import generate_scene
from src.synth.ground_truth import load_ground_truth, save_ground_truth
from src.synth.scene import SceneSpec
from .export import export_slices

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2
EXIT_FIT = 3
EXIT_METRIC = 4

FRAME_PATTERN = "frame_{:04d}"


def exit_code_for(error: Exception) -> int:
    """Map a pipeline error to its exit code."""
    if isinstance(error, FitError):
        return EXIT_FIT
    if isinstance(error, (ConfigError, SceneError)):
        return EXIT_CONFIG
    if isinstance(error, (HeatmapFormatError, HeatmapWriteError, OSError)):
        return EXIT_IO
    # covers RenderError: geometry outside the grid
    if isinstance(error, (MetricError, ShapeError, DomainError)):
        return EXIT_METRIC
    raise error


def _load(args) -> Dict:
    config = load_config(args.config)
    settings = config.get("logging") or {}
    configure_logging(args.log_level or settings.get("level", "INFO"), settings.get("log_file"))
    return config


def _with_seed(config: Dict, section_name: str, seed: Optional[int]) -> Dict:
    if seed is None:
        return config
    return merge_config(config, {section_name: {"seed": seed}})


def cmd_synth(args) -> int:
    """Render a synthetic scene into heatmaps plus ground truth."""
    config = _load(args)
    scene_path = args.scene or (config.get("synth") or {}).get("scene")
    if not scene_path:
        raise ConfigError("No scene given: pass --scene or set synth.scene")
    spec = SceneSpec.load(scene_path)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.frames is not None:
        overrides["frames"] = args.frames
    if overrides:
        spec = dataclasses.replace(spec, **overrides)

    sk = load_skeleton(config.get("skeleton_path"))
    rp = RadarParams.from_config(config)
    grid = HeatmapGrid.from_config(config)
    kp = RenderKernelParams.from_config(config)
    init_cfg = InitConfig.from_config(config)

    heatmaps, truth = generate_scene(spec, sk, rp, grid, kp, init_cfg, threads=args.threads)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for t, h in enumerate(heatmaps):
        name = FRAME_PATTERN.format(t) + ".mgsh"
        heatmap_write(h, out_dir / name)
        names.append(name)
    save_ground_truth(truth, out_dir / "gt.poses")
    save_yaml({
        "version": __version__,
        "scene": spec.to_dict(),
        "radar": rp.to_dict(),
        "grid": grid.to_dict(),
        "render": kp.to_dict(),
        "frames": names,
        "ground_truth": "gt.poses",
    }, out_dir / "manifest.yaml")
    logger.success(f"Wrote {len(heatmaps)} heatmaps and ground truth to {out_dir}")
    return EXIT_OK


def _heatmap_inputs(path: Path) -> List[Path]:
    if path.is_dir():
        files = sorted(path.glob("*.mgsh"))
        if not files:
            raise ConfigError(f"No .mgsh heatmaps in {path}")
        return files
    if not path.exists():
        raise FileNotFoundError(f"Input not found: {path}")
    return [path]


def cmd_fit(args) -> int:
    """Fit DIPR frames to one heatmap or a directory of heatmaps."""
    config = _load(args)
    if args.fit_cfg:
        config = merge_config(config, load_config(args.fit_cfg))
    config = _with_seed(config, "fit", args.seed)

    files = _heatmap_inputs(Path(args.input))
    heatmaps = [heatmap_read(f) for f in files]
    fitter = MGSFitter(config=config)
    init = load_frame(args.init) if args.init else None
    results = fitter.fit_sequence(heatmaps, init=init)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    frames = []
    for t, (source, (frame, report)) in enumerate(zip(files, results)):
        save_frame(frame, out_dir / (FRAME_PATTERN.format(t) + ".dipr.yaml"), fitter.skeleton.joint_names)
        frames.append({"source": source.name, **report.to_dict(include_timing=False)})
        logger.info(f"{source.name}: {report} in {report.wall_time_s:.2f} s")
    save_yaml({"fit": fitter.fit_config.to_dict(), "frames": frames}, out_dir / "fit_report.yaml")
    logger.success(f"Fitted {len(results)} frames into {out_dir}")
    return EXIT_OK


def cmd_render(args) -> int:
    """Render a DIPR frame document to a heatmap (DIPR-HM)."""
    config = _load(args)
    frame = load_frame(args.input)
    h = render(frame, RadarParams.from_config(config), HeatmapGrid.from_config(config),
               RenderKernelParams.from_config(config))
    heatmap_write(h, args.out)
    logger.success(f"Rendered {frame.num_joints} joints to {args.out}")
    return EXIT_OK


def cmd_cfar(args) -> int:
    """Detect a point cloud in a heatmap."""
    config = _load(args)
    cloud = ca_cfar(heatmap_read(args.input), CfarConfig.from_config(config))
    save_pointcloud(cloud, args.out)
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    """Compare analytic gradients with finite differences; exit 0 iff they agree."""
    config = _with_seed(_load(args), "gradcheck", args.seed)
    cfg = GradcheckConfig.from_config(config)
    overrides = {k: v for k, v in (("count", args.count), ("scenes", args.scenes)) if v is not None}
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)

    report = gradcheck(
        load_skeleton(config.get("skeleton_path")),
        RadarParams.from_config(config),
        GradcheckConfig.grid_from_config(config),
        RenderKernelParams.from_config(config),
        LossWeights.from_config(config),
        cfg,
        threads=args.threads,
    )
    if args.out:
        save_yaml(report.to_dict(), args.out)
    return EXIT_OK if report.passed else EXIT_IO


def cmd_eval(args) -> int:
    """Pose metrics of predicted frames against ground truth."""
    config = _load(args)
    pred = load_pose_sequence(args.pred)
    gt = load_pose_sequence(args.gt)

    dt = args.dt
    if dt is None:
        gt_path = Path(args.gt)
        dt = load_ground_truth(gt_path).dt_s if gt_path.is_file() else float(
            (config.get("fit") or {}).get("frame_interval_s", 0.1))

    metrics = PoseMetrics.from_config(config)
    report, per_frame = metrics.evaluate(pred, gt, dt)
    logger.info("\n" + metrics.format_metrics_report(report))

    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        save_yaml(report, out)
        per_frame.to_csv(out.with_suffix(".csv"), index=False)
        logger.success(f"Metric report saved to {out}")
    return EXIT_OK


def cmd_export(args) -> int:
    """Doppler slices of a heatmap as grayscale images."""
    _load(args)
    export_slices(heatmap_read(args.input), args.out_dir)
    return EXIT_OK


def cmd_sweep(args) -> int:
    """Fit a synthetic scene across hyperparameter values."""
    config = _load(args)
    values = parse_sweep_values(args.param, args.values)
    scene = SceneSpec.load(args.scene)
    if args.seed is not None:
        scene = dataclasses.replace(scene, seed=args.seed)
    table = sweep_from_config(config, args.seed).run(args.param, values, scene)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out, index=False)
    logger.success(f"Sweep table saved to {out}")
    return EXIT_OK


def _threads(value: str) -> int:
    threads = int(value)
    if threads < 1:
        raise argparse.ArgumentTypeError(f"--threads must be >= 1, got {threads}")
    return threads


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mgs",
        description="mmWave Gaussian splatting: render, detect and fit radar heatmaps. "
                    "Flags override values from the --config file.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=DEFAULT_CONFIG_PATH, help="YAML configuration file")
    parser.add_argument("--seed", type=int, default=None, help="Override the seed of the subcommand")
    parser.add_argument("--threads", type=_threads, default=1, help="Worker threads (outputs do not depend on it)")
    parser.add_argument("--log-level", default=None, help="Override logging.level")

    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="Generate a synthetic scene")
    synth.add_argument("--scene", default=None, help="Scene YAML (defaults to synth.scene)")
    synth.add_argument("--out-dir", required=True)
    synth.add_argument("--frames", type=int, default=None, help="Override the scene frame count")
    synth.set_defaults(handler=cmd_synth)

    fit = commands.add_parser("fit", help="Fit DIPR frames to heatmaps")
    fit.add_argument("--in", dest="input", required=True, help="Heatmap file or directory")
    fit.add_argument("--out", required=True, help="Output directory")
    fit.add_argument("--fit-cfg", default=None, help="YAML overlay applied on top of --config")
    fit.add_argument("--init", default=None, help="DIPR frame document to start from")
    fit.set_defaults(handler=cmd_fit)

    render_cmd = commands.add_parser("render", help="Render a DIPR frame to a heatmap")
    render_cmd.add_argument("--in", dest="input", required=True)
    render_cmd.add_argument("--out", required=True)
    render_cmd.set_defaults(handler=cmd_render)

    cfar = commands.add_parser("cfar", help="CA-CFAR point cloud of a heatmap")
    cfar.add_argument("--in", dest="input", required=True)
    cfar.add_argument("--out", required=True)
    cfar.set_defaults(handler=cmd_cfar)

    grad = commands.add_parser("gradcheck", help="Verify gradients against finite differences")
    grad.add_argument("--count", type=int, default=None)
    grad.add_argument("--scenes", type=int, default=None)
    grad.add_argument("--out", default=None, help="Report YAML")
    grad.set_defaults(handler=cmd_gradcheck)

    evaluate = commands.add_parser("eval", help="Pose metrics against ground truth")
    evaluate.add_argument("--pred", required=True, help="Fit output directory or gt.poses file")
    evaluate.add_argument("--gt", required=True)
    evaluate.add_argument("--dt", type=float, default=None, help="Frame interval (defaults to the ground truth's)")
    evaluate.add_argument("--out", default=None, help="Report YAML (per-frame CSV written alongside)")
    evaluate.set_defaults(handler=cmd_eval)

    export = commands.add_parser("export", help="Export Doppler slices as PGM images")
    export.add_argument("--in", dest="input", required=True)
    export.add_argument("--out-dir", required=True)
    export.set_defaults(handler=cmd_export)

    sweep = commands.add_parser("sweep", help="Sweep a fitting hyperparameter")
    sweep.add_argument("--param", required=True, choices=SWEEP_PARAMETERS)
    sweep.add_argument("--values", required=True, help="Comma-separated values")
    sweep.add_argument("--scene", required=True)
    sweep.add_argument("--out", required=True, help="CSV table")
    sweep.set_defaults(handler=cmd_sweep)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    torch.set_num_threads(1)
    try:
        return args.handler(args)
    except Exception as e:
        code = exit_code_for(e)
        logger.error(f"{args.command} failed: {e}")
        return code


if __name__ == "__main__":
    sys.exit(main())
