"""Command-line front door: simulate datasets, detect outlying cells,
estimate covariances and run benchmark grids over CSV files.

Exit codes: 0 on success, 1 on a compute error, 2 on a usage or input
error. All randomness flows from --seed; nothing is seeded from the
clock.

File conventions: a dataset written to DATA.csv comes with sidecars
DATA.clean_mask.csv, DATA.contam_mask.csv and DATA.sigma.csv; the
detect and estimate subcommands discover ground-truth sidecars by
those names next to their --input.
"""

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .bench import (
    ConfigError,
    parse_grid_config,
    records_to_csv,
    records_to_jsonl,
    run_grid,
    summarize,
    summary_to_csv,
)
from .datagen import (
    ContaminationModel,
    GroundTruth,
    MaskedData,
    apply_mcar,
    contaminate,
    make_covariance,
    sample_gaussian,
)
from .debias import center_observed
from .detect import DetectionError, ddc, score_filter, tail_cut
from .linalg import effective_rank, project_psd
from .pipelines import PipelineSpec, run_pipeline

USAGE_EXIT = 2
COMPUTE_EXIT = 1


class CliInputError(ValueError):
    """Input or usage problem; maps to exit code 2."""


def _sidecar(path: Path, tag: str) -> Path:
    return path.with_name(path.stem + f".{tag}.csv")


def _check_readable(path: Path):
    if not path.is_file():
        raise CliInputError(f"input file not found: {path}")


def _check_writable(path: Path):
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise CliInputError(f"output directory does not exist: {parent}")
    if not os.access(parent, os.W_OK):
        raise CliInputError(f"output directory is not writable: {parent}")


def _load_masked(path: Path) -> tuple[MaskedData, bool]:
    """Load a dataset, attaching ground-truth masks when the sidecars
    written by the simulate subcommand are present."""
    values = io.read_data_csv(path)
    clean_path = _sidecar(path, "clean_mask")
    contam_path = _sidecar(path, "contam_mask")
    if clean_path.is_file() and contam_path.is_file():
        clean = io.read_mask_csv(clean_path)
        contam = io.read_mask_csv(contam_path)
        if clean.shape != values.shape or contam.shape != values.shape:
            raise CliInputError("ground-truth sidecar shapes do not match the data")
        return MaskedData(values, clean, contam), True
    return MaskedData.from_values(values), False


def cmd_simulate(args) -> int:
    out = Path(args.output)
    _check_writable(out)
    model = ContaminationModel(args.delta, args.epsilon, args.law, args.sigma)
    sigma = make_covariance(args.p, args.r, args.seed)
    x = sample_gaussian(sigma, args.n, args.seed + 1)
    md = apply_mcar(x, args.delta, args.seed + 2)
    if args.law is not None and args.epsilon > 0:
        md = contaminate(md, model, args.seed + 3)
    io.write_data_csv(out, md.values)
    io.write_mask_csv(_sidecar(out, "clean_mask"), md.clean_mask)
    io.write_mask_csv(_sidecar(out, "contam_mask"), md.contam_mask)
    io.write_matrix_csv(_sidecar(out, "sigma"), sigma)
    print(f"wrote {out} plus clean_mask/contam_mask/sigma sidecars")
    return 0


def cmd_detect(args) -> int:
    inp, out = Path(args.input), Path(args.output)
    _check_readable(inp)
    _check_writable(out)
    md, have_truth = _load_masked(inp)
    if args.method == "tail":
        report = tail_cut(md, args.tail_k)
        params = {"method": "tail", "tail_k": args.tail_k}
    else:
        report = ddc(md, args.quantile)
        params = {"method": "ddc", "quantile": args.quantile}
    io.write_mask_csv(out, report.flags)
    info = dict(params)
    info["n_flagged"] = int(report.flags.sum())
    info["flagged_fraction"] = float(report.flags.mean())
    if have_truth:
        delta_hat, eps_hat = score_filter(report, md)
        info["delta_hat"] = delta_hat
        info["eps_hat"] = eps_hat
    report_path = out.with_name(out.stem + ".report.json")
    with open(report_path, "w") as fh:
        json.dump(info, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out} and {report_path}")
    return 0


def cmd_estimate(args) -> int:
    inp, out = Path(args.input), Path(args.output)
    _check_readable(inp)
    _check_writable(out)
    md, have_truth = _load_masked(inp)
    if args.center:
        md = MaskedData(
            center_observed(md.values), md.clean_mask.copy(), md.contam_mask.copy()
        )
    spec = PipelineSpec(
        args.pipeline,
        quantile=args.quantile,
        tail_k=args.tail_k,
        k_neighbors=args.k_neighbors,
    )
    truth = None
    if spec.kind == "oracle_mv":
        sigma_path = _sidecar(inp, "sigma")
        if not (have_truth and sigma_path.is_file()):
            raise CliInputError(
                "the oracle pipeline needs the ground-truth sidecars written by simulate"
            )
        truth = GroundTruth(io.read_matrix_csv(sigma_path), md.values)
    elif have_truth:
        truth = GroundTruth(np.zeros((md.p, md.p)), md.values)
    t0 = time.perf_counter()
    sigma_hat, report = run_pipeline(spec, md, truth)
    wall_ms = (time.perf_counter() - t0) * 1e3
    io.write_matrix_csv(out, sigma_hat)
    from .debias import estimate_delta

    delta_global, delta_features = estimate_delta(md)
    meta = {
        "pipeline": spec.label,
        "n": md.n,
        "p": md.p,
        "delta_hat": delta_global,
        "delta_hat_per_feature": [float(d) for d in delta_features],
        "effective_rank": effective_rank(project_psd(sigma_hat)),
        "wall_time_ms": wall_ms,
        "centered": bool(args.center),
    }
    if report is not None and report.delta_hat is not None:
        meta["retained_clean_fraction"] = report.delta_hat
        meta["retained_contaminated_fraction"] = report.eps_hat
    meta_path = out.with_name(out.stem + ".meta.json")
    with open(meta_path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out} and {meta_path}")
    return 0


def cmd_bench(args) -> int:
    cfg_path, out = Path(args.grid_config), Path(args.output)
    _check_readable(cfg_path)
    _check_writable(out)
    grid = parse_grid_config(cfg_path.read_text())
    if args.seed is not None:
        from dataclasses import replace

        grid = replace(grid, seed=args.seed)
    records = run_grid(grid)
    records_to_csv(records, out, include_timing=args.with_timing)
    jsonl_path = out.with_name(out.stem + ".jsonl")
    records_to_jsonl(records, jsonl_path, include_timing=args.with_timing)
    rows = summarize(records)
    summary_path = out.with_name(out.stem + ".summary.csv")
    summary_to_csv(rows, summary_path)
    n_err = sum(1 for r in records if r.status != "ok")
    print(f"wrote {out}, {jsonl_path} and {summary_path} ({len(records)} records, {n_err} failed)")
    times = [r.wall_time_ms for r in records if r.status == "ok"]
    if times:
        print(f"mean pipeline wall time: {np.mean(times):.3f} ms")
    for row in rows:
        parts = [f"delta={row['delta']}", f"pipeline={row['pipeline']}"]
        if row["op_error_mean"] is not None:
            parts.append(f"error={row['op_error_mean']:.4g}+/-{row['op_error_std']:.2g}")
        if row["delta_hat_mean"] is not None:
            parts.append(f"delta_hat={row['delta_hat_mean']:.4f}")
        if row["eps_hat_mean"] is not None:
            parts.append(f"eps_hat={row['eps_hat_mean']:.5f}")
        print("  ".join(parts))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellcov",
        description="Covariance estimation under missing values and cell-wise outliers.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic dataset with ground truth")
    sim.add_argument("--n", type=int, required=True, help="number of samples")
    sim.add_argument("--p", type=int, required=True, help="number of features")
    sim.add_argument("--r", type=float, default=5.0, help="requested effective rank")
    sim.add_argument("--delta", type=float, required=True, help="cell observation probability")
    sim.add_argument("--epsilon", type=float, default=0.0, help="contamination probability of an unobserved cell")
    sim.add_argument("--law", choices=["dirac", "gauss"], default=None, help="contamination law")
    sim.add_argument("--sigma", type=float, default=1.0, help="contamination intensity")
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--output", required=True, help="dataset CSV path")
    sim.set_defaults(func=cmd_simulate)

    det = sub.add_parser("detect", help="flag outlying cells in a CSV dataset")
    det.add_argument("--input", required=True)
    det.add_argument("--method", choices=["tail", "ddc"], required=True)
    det.add_argument("--quantile", type=float, default=0.99)
    det.add_argument("--tail-k", type=float, default=3.0)
    det.add_argument("--output", required=True, help="flag mask CSV path")
    det.set_defaults(func=cmd_detect)

    est = sub.add_parser("estimate", help="estimate a covariance matrix from a CSV dataset")
    est.add_argument("--input", required=True)
    est.add_argument(
        "--pipeline",
        choices=["classical", "mv", "oracle_mv", "tail_mv", "ddc_mv", "ddc_knn"],
        default="ddc_mv",
    )
    est.add_argument("--quantile", type=float, default=0.99)
    est.add_argument("--tail-k", type=float, default=3.0)
    est.add_argument("--k-neighbors", type=int, default=5)
    est.add_argument("--center", action="store_true", help="subtract per-feature observed means first")
    est.add_argument("--output", required=True, help="covariance CSV path")
    est.set_defaults(func=cmd_estimate)

    ben = sub.add_parser("bench", help="run a Monte Carlo benchmark grid")
    ben.add_argument("--grid-config", required=True, help="flat key=value grid configuration file")
    ben.add_argument("--seed", type=int, default=None, help="override the grid seed")
    ben.add_argument("--with-timing", action="store_true",
                     help="include wall_time_ms in the records files (breaks byte-level reproducibility)")
    ben.add_argument("--output", required=True, help="records CSV path")
    ben.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "pipeline", None) == "mv":
        # plain debiased estimator = tail pipeline with an infinite cut;
        # expose it directly as a no-filter run
        args.pipeline = "tail_mv"
        args.tail_k = float("inf")
    try:
        return args.func(args)
    except (CliInputError, io.CsvFormatError, ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (DetectionError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"compute error: {exc}", file=sys.stderr)
        return COMPUTE_EXIT


if __name__ == "__main__":
    sys.exit(main())
