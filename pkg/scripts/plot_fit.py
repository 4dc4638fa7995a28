"""
Plot Fit Results
Charts for fit loss traces, per-frame motion intensity and sweep tables.
"""

import argparse
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd
import seaborn as sns
from loguru import logger

from src.core import load_config

# Set style
sns.set_style("whitegrid")
plt.rcParams['figure.figsize'] = (14, 8)


def plot_loss_traces(report_path: Path, output_dir: Path):
    report = load_config(report_path)
    fig, ax = plt.subplots()
    for frame in report.get("frames", []):
        ax.semilogy(frame["loss_trace"], linewidth=1.5, label=frame.get("source", ""))

    ax.set_title('Total Loss per Iteration', fontsize=18, fontweight='bold', pad=20)
    ax.set_xlabel('Iteration', fontsize=13, fontweight='bold')
    ax.set_ylabel('Loss', fontsize=13, fontweight='bold')
    if len(report.get("frames", [])) <= 12:
        ax.legend(fontsize=10, loc='upper right')

    plt.tight_layout()
    path = output_dir / 'loss_traces.png'
    plt.savefig(path, dpi=150, bbox_inches='tight')
    plt.close()
    logger.success(f"Saved: {path}")


def plot_motion_intensity(per_frame_csv: Path, output_dir: Path):
    df = pd.read_csv(per_frame_csv).dropna()
    fig, ax = plt.subplots()
    ax.plot(df["frame"], df["motion_intensity_gt_mps"], label='Ground truth', linewidth=2.5, color='#2E86AB')
    ax.plot(df["frame"], df["motion_intensity_pred_mps"], label='Fitted', linewidth=2.5, color='#A23B72')

    ax.set_title('Inter-Frame Motion Intensity', fontsize=18, fontweight='bold', pad=20)
    ax.set_xlabel('Frame', fontsize=13, fontweight='bold')
    ax.set_ylabel('Mean joint speed (m/s)', fontsize=13, fontweight='bold')
    ax.legend(fontsize=13, loc='upper left')

    plt.tight_layout()
    path = output_dir / 'motion_intensity.png'
    plt.savefig(path, dpi=150, bbox_inches='tight')
    plt.close()
    logger.success(f"Saved: {path}")


def plot_sweep(sweep_csv: Path, output_dir: Path):
    df = pd.read_csv(sweep_csv)
    parameter = df["parameter"].iloc[0]
    long = df.melt(id_vars=["value"], value_vars=["mpjpe_m", "pa_mpjpe_m"], var_name="metric", value_name="error_m")
    long["error_mm"] = long["error_m"] * 1000

    fig, ax = plt.subplots()
    sns.barplot(data=long, x="value", y="error_mm", hue="metric", ax=ax)
    ax.set_title(f'Pose Error vs {parameter}', fontsize=18, fontweight='bold', pad=20)
    ax.set_xlabel(parameter, fontsize=13, fontweight='bold')
    ax.set_ylabel('Error (mm)', fontsize=13, fontweight='bold')

    plt.tight_layout()
    path = output_dir / f'sweep_{parameter}.png'
    plt.savefig(path, dpi=150, bbox_inches='tight')
    plt.close()
    logger.success(f"Saved: {path}")


def main():
    parser = argparse.ArgumentParser(description="Plot fit results")
    parser.add_argument("--fit-report", help="fit_report.yaml from `mgs fit`")
    parser.add_argument("--per-frame", help="Per-frame CSV from `mgs eval --out`")
    parser.add_argument("--sweep", help="Sweep CSV from `mgs sweep`")
    parser.add_argument("--output-dir", default="results/visualizations")
    args = parser.parse_args()

    output_dir = Path(args.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)

    if args.fit_report:
        plot_loss_traces(Path(args.fit_report), output_dir)
    if args.per_frame:
        plot_motion_intensity(Path(args.per_frame), output_dir)
    if args.sweep:
        plot_sweep(Path(args.sweep), output_dir)
    if not (args.fit_report or args.per_frame or args.sweep):
        parser.error("nothing to plot; pass --fit-report, --per-frame or --sweep")


if __name__ == "__main__":
    main()
