"""Monte Carlo benchmark harness.

Runs a grid of (observation rate, pipeline, repetition) experiments on
synthetic data, recording estimation errors, filtering accounting and
wall time. Every record's randomness is a pure function of the grid
seed and its position in the grid, so reruns are bit-for-bit
reproducible. Timing is excluded from the output files unless asked
for, keeping them byte-identical across reruns.
"""

import json
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import check_positive_int
from .datagen import (
    ContaminationModel,
    GroundTruth,
    apply_mcar,
    contaminate,
    make_covariance,
    sample_gaussian,
    _entropy,
)
from .linalg import frobenius_norm, operator_norm
from .pipelines import PipelineSpec, run_pipeline

OPERATOR = "operator"
FROBENIUS = "frobenius"


class ConfigError(ValueError):
    """Raised on malformed grid configuration; names the offending key."""


@dataclass(frozen=True)
class ExperimentGrid:
    """Monte Carlo configuration: one covariance (from seed), a grid of
    observation rates, one contamination setting, a list of pipelines
    and a repetition count."""

    n: int
    p: int
    r: float
    delta_grid: tuple
    epsilon: float
    law: Optional[str]
    sigma: float
    pipelines: tuple
    reps: int
    seed: int
    metric: str = OPERATOR

    def __post_init__(self):
        check_positive_int(self.n, "n")
        check_positive_int(self.p, "p")
        check_positive_int(self.reps, "reps")
        if not self.delta_grid:
            raise ValueError("delta_grid must be non-empty")
        if not self.pipelines:
            raise ValueError("pipelines must be non-empty")
        if self.metric not in (OPERATOR, FROBENIUS):
            raise ValueError(f"metric must be '{OPERATOR}' or '{FROBENIUS}'")
        for d in self.delta_grid:
            if not 0.0 < d <= 1.0:
                raise ValueError(f"every delta must lie in (0, 1], got {d}")


@dataclass
class BenchRecord:
    """One pipeline run at one grid point."""

    n: int
    p: int
    r: float
    delta: float
    epsilon: float
    law: Optional[str]
    sigma: float
    pipeline: str
    rep_index: int
    seed_used: int
    status: str = "ok"
    op_error: float = float("nan")
    rel_error: float = float("nan")
    delta_hat: Optional[float] = None
    eps_hat: Optional[float] = None
    wall_time_ms: float = float("nan")


RECORD_FIELDS = (
    "n", "p", "r", "delta", "epsilon", "law", "sigma", "pipeline",
    "rep_index", "seed_used", "status", "op_error", "rel_error",
    "delta_hat", "eps_hat",
)
TIMING_FIELD = "wall_time_ms"


def run_grid(grid: ExperimentGrid) -> list[BenchRecord]:
    """Execute the full grid; per-record failures become error records
    rather than crashing the run."""
    sigma_true = make_covariance(grid.p, grid.r, grid.seed)
    err = operator_norm if grid.metric == OPERATOR else frobenius_norm
    norm_true = err(sigma_true)
    records = []
    for di, delta in enumerate(grid.delta_grid):
        for pi, spec in enumerate(grid.pipelines):
            for rep in range(grid.reps):
                ss = np.random.SeedSequence([_entropy(grid.seed), di, pi, rep])
                s_sample, s_mask, s_fill = (int(s) for s in ss.generate_state(3))
                rec = BenchRecord(
                    n=grid.n, p=grid.p, r=grid.r, delta=delta,
                    epsilon=grid.epsilon, law=grid.law, sigma=grid.sigma,
                    pipeline=spec.label, rep_index=rep, seed_used=s_sample,
                )
                try:
                    x = sample_gaussian(sigma_true, grid.n, s_sample)
                    md = apply_mcar(x, delta, s_mask)
                    if grid.law is not None and grid.epsilon > 0:
                        model = ContaminationModel(delta, grid.epsilon, grid.law, grid.sigma)
                        md = contaminate(md, model, s_fill)
                    truth = GroundTruth(sigma_true, x)
                    t0 = time.perf_counter()
                    sigma_hat, report = run_pipeline(spec, md, truth)
                    rec.wall_time_ms = (time.perf_counter() - t0) * 1e3
                    rec.op_error = err(sigma_hat - sigma_true)
                    rec.rel_error = rec.op_error / norm_true
                    if report is not None:
                        rec.delta_hat = report.delta_hat
                        rec.eps_hat = report.eps_hat
                except Exception as exc:  # noqa: BLE001 - failures are data
                    rec.status = f"error: {exc}"
                records.append(rec)
    return records


def relative_spectral_difference(a, b, ref=None) -> float:
    """100 * ||a - b|| / ||ref|| with ref defaulting to b."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    ref = b if ref is None else np.asarray(ref, dtype=np.float64)
    denom = operator_norm(ref)
    if denom == 0.0:
        raise ValueError("reference matrix has zero norm")
    return 100.0 * operator_norm(a - b) / denom


def summarize(records: list[BenchRecord]) -> list[dict]:
    """Mean and (n-1)-denominator standard deviation per grid point.

    A group with a single record gets std 0 together with a flag."""
    groups: dict[tuple, list[BenchRecord]] = {}
    for rec in records:
        groups.setdefault((rec.delta, rec.pipeline), []).append(rec)
    rows = []
    for (delta, pipeline), group in groups.items():
        ok = [r for r in group if r.status == "ok"]
        row = {
            "delta": delta,
            "pipeline": pipeline,
            "n_records": len(group),
            "n_ok": len(ok),
            "single_record": len(ok) == 1,
        }
        for name in ("op_error", "rel_error", "delta_hat", "eps_hat"):
            vals = [getattr(r, name) for r in ok if getattr(r, name) is not None]
            vals = [v for v in vals if not np.isnan(v)]
            if not vals:
                row[f"{name}_mean"] = None
                row[f"{name}_std"] = None
            else:
                row[f"{name}_mean"] = float(np.mean(vals))
                row[f"{name}_std"] = 0.0 if len(vals) == 1 else float(np.std(vals, ddof=1))
        rows.append(row)
    return rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return "1" if value else "0"
    return str(value)


def records_to_csv(records: list[BenchRecord], path, include_timing: bool = False) -> None:
    fields = RECORD_FIELDS + ((TIMING_FIELD,) if include_timing else ())
    with open(path, "w", newline="") as fh:
        fh.write(",".join(fields) + "\n")
        for rec in records:
            fh.write(",".join(_cell(getattr(rec, f)) for f in fields) + "\n")


def records_to_jsonl(records: list[BenchRecord], path, include_timing: bool = False) -> None:
    fields = RECORD_FIELDS + ((TIMING_FIELD,) if include_timing else ())
    with open(path, "w") as fh:
        for rec in records:
            obj = {f: getattr(rec, f) for f in fields}
            obj = {k: (None if isinstance(v, float) and np.isnan(v) else v) for k, v in obj.items()}
            fh.write(json.dumps(obj, sort_keys=True) + "\n")


def summary_to_csv(rows: list[dict], path) -> None:
    if not rows:
        raise ValueError("no summary rows to write")
    fields = list(rows[0])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(fields) + "\n")
        for row in rows:
            fh.write(",".join(_cell(row[f]) for f in fields) + "\n")


# ---------------------------------------------------------------------------
# Grid configuration files: flat "key = value" lines, # comments.
# ---------------------------------------------------------------------------

_REQUIRED_KEYS = ("n", "p", "r", "delta_grid", "epsilon", "law", "sigma", "pipelines", "reps", "seed")
_OPTIONAL_KEYS = ("metric", "quantile", "tail_k", "k_neighbors")


def parse_pipeline_token(token: str, quantile=0.99, tail_k=3.0, k_neighbors=5) -> PipelineSpec:
    """Parse 'kind' or 'kind:quantile' into a PipelineSpec."""
    token = token.strip()
    if ":" in token:
        kind, _, qs = token.partition(":")
        try:
            quantile = float(qs)
        except ValueError:
            raise ConfigError(f"pipelines: cannot parse quantile in token {token!r}") from None
    else:
        kind = token
    try:
        return PipelineSpec(kind.strip(), quantile=quantile, tail_k=tail_k, k_neighbors=k_neighbors)
    except ValueError as exc:
        raise ConfigError(f"pipelines: {exc}") from None


def parse_grid_config(text: str) -> ExperimentGrid:
    """Parse a flat key-value grid configuration."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _REQUIRED_KEYS + _OPTIONAL_KEYS:
            raise ConfigError(f"unknown key {key!r}")
        raw[key] = value.strip()
    for key in _REQUIRED_KEYS:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")

    def number(key, cast):
        try:
            return cast(raw[key])
        except ValueError:
            raise ConfigError(f"key {key!r}: cannot parse {raw[key]!r}") from None

    law = raw["law"].lower()
    if law in ("none", ""):
        law_val = None
    elif law in ("dirac", "gauss"):
        law_val = law
    else:
        raise ConfigError(f"key 'law': expected dirac, gauss or none, got {raw['law']!r}")

    try:
        delta_grid = tuple(float(tok) for tok in raw["delta_grid"].split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"key 'delta_grid': cannot parse {raw['delta_grid']!r}") from None

    quantile = number("quantile", float) if "quantile" in raw else 0.99
    tail_k = number("tail_k", float) if "tail_k" in raw else 3.0
    k_neighbors = number("k_neighbors", int) if "k_neighbors" in raw else 5
    pipelines = tuple(
        parse_pipeline_token(tok, quantile, tail_k, k_neighbors)
        for tok in raw["pipelines"].split(",")
        if tok.strip()
    )
    try:
        return ExperimentGrid(
            n=number("n", int),
            p=number("p", int),
            r=number("r", float),
            delta_grid=delta_grid,
            epsilon=number("epsilon", float),
            law=law_val,
            sigma=number("sigma", float),
            pipelines=pipelines,
            reps=number("reps", int),
            seed=number("seed", int),
            metric=raw.get("metric", OPERATOR),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
