"""Berry-Esseen rate experiments: build nu_n, measure distances, fit slopes.

For a standardized base measure mu the harness forms
nu_n = (D_{1/sqrt(n)} mu)^{boxplus n}, recovers its density, measures
Kolmogorov / total-variation / W1 distances to the standard semicircle,
and fits log-log slopes.  Rows stream to CSV as they complete, so an
interrupted run resumes without recomputing finished n values.
"""

from __future__ import annotations

import json
import math
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from . import metrics as met
from .analytic import (
    GridDensity,
    MeasureSpec,
    nfold_convolve,
    semicircle_density,
    stieltjes_density,
)
from .errors import ConfigError, ConvergenceError, FitRefusalError

CSV_HEADER = "n,d_kol,d_tv,d_w1,mass_deficit,subord_iters,runtime_ms"
ALL_METRICS = ("kol", "tv", "w1")
DEFAULT_N_VALUES = (4, 8, 16, 32, 64, 128, 256, 512)
DEFAULT_GRID_POINTS = 2001
# auto window half-width: sqrt(n) * R_base capped by superconvergence scale
_WINDOW_CAP = 5.5
_WINDOW_PAD = 0.5
FLOOR_MULTIPLE = 10.0


@dataclass
class ExperimentConfig:
    base_measure: MeasureSpec
    n_values: tuple = DEFAULT_N_VALUES
    metrics: tuple = ALL_METRICS
    grid_points: int = DEFAULT_GRID_POINTS
    window: tuple | None = None
    output: str = "berry_esseen.csv"
    normalize: bool = False

    def __post_init__(self):
        ns = tuple(int(n) for n in self.n_values)
        if len(ns) < 2 or list(ns) != sorted(set(ns)) or ns[0] < 1:
            raise ConfigError("n_values must be >= 2 distinct ascending positive integers")
        self.n_values = ns
        bad = [m for m in self.metrics if m not in ALL_METRICS]
        if bad or not self.metrics:
            raise ConfigError(f"metrics must be a non-empty subset of {ALL_METRICS}")
        self.metrics = tuple(self.metrics)
        if self.grid_points < 64:
            raise ConfigError("grid_points must be >= 64")
        if self.window is not None:
            lo, hi = self.window
            if not hi > lo:
                raise ConfigError("window must satisfy lo < hi")
            self.window = (float(lo), float(hi))
        if self.normalize:
            self.base_measure = standardize(self.base_measure)
        else:
            m = self.base_measure.moments(2)
            if abs(float(m[1])) > 1e-12 or abs(float(m[2]) - 1.0) > 1e-12:
                raise ConfigError(
                    "base measure must be centered and standardized "
                    "(mean 0, variance 1); pass normalize=true to rescale"
                )


def standardize(mu: MeasureSpec) -> MeasureSpec:
    """Affine pushforward x -> (x - mean)/std."""
    m = mu.moments(2)
    mean = float(m[1])
    var = float(m[2]) - mean * mean
    if var <= 0:
        raise ConfigError("cannot standardize a degenerate measure")
    std = math.sqrt(var)
    if mu.kind == "atomic":
        return MeasureSpec.atomic([((p - mean) / std, w) for p, w in mu.atoms])
    if mu.kind == "semicircle":
        return MeasureSpec.semicircle(0.0, 1.0)
    xs = (mu.grid.x - mean) / std
    return MeasureSpec.from_grid(GridDensity(xs[0], xs[-1], mu.grid.values * std))


def parse_measure(obj: dict) -> MeasureSpec:
    """MeasureSpec from its JSON form; unknown keys rejected."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise ConfigError("measure must be an object with a 'type' key")
    kind = obj["type"]
    try:
        if kind == "atomic":
            _require_keys(obj, {"type", "atoms"})
            return MeasureSpec.atomic([(float(p), float(w)) for p, w in obj["atoms"]])
        if kind == "semicircle":
            _require_keys(obj, {"type", "mean", "variance"}, optional={"mean", "variance"})
            return MeasureSpec.semicircle(
                float(obj.get("mean", 0.0)), float(obj.get("variance", 1.0))
            )
        if kind == "grid":
            _require_keys(obj, {"type", "path"})
            return MeasureSpec.from_grid(GridDensity.from_csv(obj["path"]))
    except ConfigError:
        raise
    except (ValueError, TypeError, OSError) as exc:
        raise ConfigError(f"bad measure definition: {exc}") from exc
    raise ConfigError(f"unknown measure type {kind!r}")


def _require_keys(obj: dict, allowed: set, optional: set = frozenset()):
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    missing = allowed - set(obj) - set(optional)
    if missing:
        raise ConfigError(f"missing keys {sorted(missing)}")


def parse_config(obj: dict) -> ExperimentConfig:
    """ExperimentConfig from a JSON document; unknown keys rejected."""
    allowed = {"base_measure", "n_values", "metrics", "grid", "output", "normalize"}
    _require_keys(obj, allowed, optional={"n_values", "metrics", "grid", "normalize"})
    kwargs = {"base_measure": parse_measure(obj["base_measure"]), "output": obj["output"]}
    if "n_values" in obj:
        kwargs["n_values"] = tuple(obj["n_values"])
    if "metrics" in obj:
        kwargs["metrics"] = tuple(obj["metrics"])
    if "grid" in obj:
        grid = obj["grid"]
        _require_keys(grid, {"window", "n_points"}, optional={"window", "n_points"})
        if "n_points" in grid:
            kwargs["grid_points"] = int(grid["n_points"])
        if "window" in grid:
            kwargs["window"] = tuple(grid["window"])
    if "normalize" in obj:
        kwargs["normalize"] = bool(obj["normalize"])
    return ExperimentConfig(**kwargs)


def auto_window(base: MeasureSpec, n: int) -> tuple:
    half = min(math.sqrt(n) * base.support_radius, _WINDOW_CAP) + _WINDOW_PAD
    return (-half, half)


@dataclass
class ExperimentRow:
    n: int
    report: met.DistanceReport | None
    subord_iters: int
    runtime_ms: float
    line: str = field(default="", repr=False)

    @property
    def failed(self) -> bool:
        return self.report is None


def _format_row(row: ExperimentRow, wanted) -> str:
    def fmt(v):
        return "" if v is None else f"{v:.17g}"

    if row.failed:
        cells = [str(row.n), "", "", "", "", "-1", f"{row.runtime_ms:.17g}"]
    else:
        rep = row.report
        cells = [
            str(row.n),
            fmt(rep.d_kol if "kol" in wanted else None),
            fmt(rep.d_tv if "tv" in wanted else None),
            fmt(rep.d_w1 if "w1" in wanted else None),
            fmt(rep.mass_deficit),
            str(row.subord_iters),
            f"{row.runtime_ms:.17g}",
        ]
    return ",".join(cells)


def _parse_rows(path: Path) -> dict:
    """Completed rows keyed by n (failed rows are recomputed on resume)."""
    done = {}
    if not path.exists():
        return done
    lines = path.read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        return done
    for line in lines[1:]:
        cells = line.split(",")
        if len(cells) != 7 or not cells[0]:
            continue
        if cells[5] == "-1":
            continue
        done[int(cells[0])] = line
    return done


def compute_row(cfg: ExperimentConfig, n: int) -> ExperimentRow:
    """Convolve, invert, and measure a single n (no file I/O)."""
    t0 = time.perf_counter()
    scale = 1.0 / math.sqrt(n)
    try:
        ev = nfold_convolve(cfg.base_measure, n, scale)
        lo, hi = cfg.window if cfg.window else auto_window(cfg.base_measure, n)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            density = stieltjes_density(ev, lo, hi, cfg.grid_points)
        reference = semicircle_density(lo, hi, cfg.grid_points)
        report = met.distance_report(density, reference, cfg.metrics)
        iters = ev.peak_iterations
    except ConvergenceError:
        return ExperimentRow(
            n=n,
            report=None,
            subord_iters=-1,
            runtime_ms=(time.perf_counter() - t0) * 1e3,
        )
    return ExperimentRow(
        n=n,
        report=report,
        subord_iters=iters,
        runtime_ms=(time.perf_counter() - t0) * 1e3,
    )


def run_experiment(cfg: ExperimentConfig) -> list:
    """Run every configured n, streaming rows to the output CSV.

    Completed rows already in the file are kept byte-identical and not
    recomputed; failed rows are retried.
    """
    path = Path(cfg.output)
    done = _parse_rows(path)
    rows = []
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        fh.flush()
        for n in cfg.n_values:
            if n in done:
                line = done[n]
                cells = line.split(",")
                report = met.DistanceReport(
                    d_kol=float(cells[1]) if cells[1] else float("nan"),
                    d_tv=float(cells[2]) if cells[2] else None,
                    d_w1=float(cells[3]) if cells[3] else float("nan"),
                    mass_deficit=float(cells[4]) if cells[4] else float("nan"),
                )
                row = ExperimentRow(
                    n=n,
                    report=report,
                    subord_iters=int(cells[5]),
                    runtime_ms=float(cells[6]),
                    line=line,
                )
            else:
                row = compute_row(cfg, n)
                row.line = _format_row(row, cfg.metrics)
            fh.write(row.line + "\n")
            fh.flush()
            rows.append(row)
    return [(r.n, r.report) for r in rows]


@dataclass
class RateFit:
    """Least-squares slope of log(distance) against log(n)."""

    metric: str
    slope: float
    intercept: float
    r_squared: float
    points: list

    def to_json(self) -> str:
        return json.dumps(
            {
                "metric": self.metric,
                "slope": self.slope,
                "intercept": self.intercept,
                "r_squared": self.r_squared,
                "points": [[n, d] for n, d in self.points],
            }
        )


def fit_rate(points, metric: str = "", floor: float = 0.0) -> RateFit:
    """OLS fit of log d = slope * log n + intercept.

    Points with non-finite or non-positive distances, or within
    ``FLOOR_MULTIPLE`` of the discretization floor, are discarded; fewer
    than 4 survivors raises :class:`FitRefusalError`.
    """
    usable = [
        (int(n), float(d))
        for n, d in points
        if d is not None and math.isfinite(d) and d > 0 and d > FLOOR_MULTIPLE * floor
    ]
    if len(usable) < 4:
        raise FitRefusalError(
            f"only {len(usable)} usable points (need 4); "
            f"floor {floor:.3e} x {FLOOR_MULTIPLE}"
        )
    xs = [math.log(n) for n, _ in usable]
    ys = [math.log(d) for _, d in usable]
    k = len(xs)
    mx = sum(xs) / k
    my = sum(ys) / k
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = my - slope * mx
    ss_res = sum((y - slope * x - intercept) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - my) ** 2 for y in ys)
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return RateFit(metric=metric, slope=slope, intercept=intercept, r_squared=r2, points=usable)


def load_distance_column(path, metric: str) -> list:
    """(n, distance) pairs for one metric from an experiment CSV."""
    col = {"kol": 1, "tv": 2, "w1": 3}[metric]
    out = []
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError(f"{path} is not an experiment CSV (bad header)")
    for line in lines[1:]:
        cells = line.split(",")
        if len(cells) != 7 or cells[5] == "-1":
            continue
        out.append((int(cells[0]), float(cells[col]) if cells[col] else None))
    return out


def discretization_floor(
    grid_points: int = DEFAULT_GRID_POINTS, window: tuple | None = None, n: int = 16
) -> met.DistanceReport:
    """Pipeline self-distance of the semicircle base (the noise floor).

    Runs the standard semicircle through the same convolve-and-invert
    pipeline as a real experiment and measures the distances to the
    closed-form density on the same grid.
    """
    base = MeasureSpec.semicircle(0.0, 1.0)
    ev = nfold_convolve(base, n, 1.0 / math.sqrt(n))
    lo, hi = window if window else auto_window(base, n)
    density = stieltjes_density(ev, lo, hi, grid_points)
    reference = semicircle_density(lo, hi, grid_points)
    return met.distance_report(density, reference)
