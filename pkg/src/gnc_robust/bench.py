"""Monte Carlo sweeps over outlier rates, methods and seeded instances.

Every (rate, run) cell draws one instance from a seed derived from the
sweep seed and the cell indices, and all requested methods run on that same
instance, so comparisons between methods are paired. Records come back in
(rate, run, method) order no matter how many worker processes are used.
"""

from __future__ import annotations

import csv
import enum
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from .errors import GncError
from .gnc import GncConfig, run_gnc
from .ransac import RansacConfig, ransac_registration, ransac_shape_alignment
from .registration import RegistrationProblem
from .shape_alignment import ShapeAlignmentProblem
from .synthetic import (
    RegistrationInstanceSpec,
    ShapeInstanceSpec,
    generate_registration,
    generate_shape_alignment,
    registration_errors,
    shape_errors,
)

FAILED = 1e9
CSV_HEADER = (
    "method", "outlier_rate", "run_index", "rotation_error_deg", "translation_error",
    "scale_error", "outer_iterations", "wall_time_ms", "converged", "precision", "recall",
)


class Application(str, enum.Enum):
    REGISTRATION = "registration"
    SHAPE = "shape"


class Method(str, enum.Enum):
    GNC_GM = "GncGm"
    GNC_TLS = "GncTls"
    RANSAC = "Ransac"
    LS = "NonRobustLs"


DEFAULT_RATES = tuple(round(0.1 * k, 1) for k in range(10))


@dataclass(frozen=True)
class BenchSpec:
    application: Application = Application.REGISTRATION
    methods: tuple = tuple(Method)
    outlier_rates: tuple = DEFAULT_RATES
    runs_per_rate: int = 20
    n: Optional[int] = None  # 100 for registration, 50 for shape alignment
    sigma: float = 0.01
    c_bar: Optional[float] = None  # 6 sigma
    seed: int = 0
    ransac_max_iterations: Optional[int] = None  # 1000 registration, 100 shape
    ply_path: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "application", Application(self.application))
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        rates = tuple(float(r) for r in self.outlier_rates)
        object.__setattr__(self, "outlier_rates", rates)
        if self.runs_per_rate < 1:
            raise ValueError("runs_per_rate must be at least 1")
        if not rates or any(not 0 <= r < 1 for r in rates):
            raise ValueError("outlier rates must lie in [0, 1)")
        if any(b <= a for a, b in zip(rates, rates[1:])):
            raise ValueError("outlier rates must be strictly increasing")
        if not self.methods:
            raise ValueError("at least one method is required")

    @property
    def point_count(self):
        if self.n is not None:
            return self.n
        return 100 if self.application is Application.REGISTRATION else 50

    @property
    def noise_bound(self):
        if self.c_bar is not None:
            return self.c_bar
        return 6.0 * self.sigma if self.sigma > 0 else 1e-3

    @property
    def ransac_iterations(self):
        if self.ransac_max_iterations is not None:
            return self.ransac_max_iterations
        return 1000 if self.application is Application.REGISTRATION else 100


@dataclass(frozen=True)
class BenchRecord:
    method: str
    outlier_rate: float
    run_index: int
    rotation_error_deg: float
    translation_error: float
    scale_error: Optional[float]
    outer_iterations: int
    wall_time_ms: float
    converged: bool
    precision: float
    recall: float


@dataclass
class MethodOutcome:
    estimate: object
    inlier_mask: np.ndarray
    iterations: int
    converged: bool
    wall_time_ms: float = field(default=0.0)


def derive_seed(seed, rate_index, run_index) -> int:
    """Instance seed for one sweep cell; identical for every method."""
    ss = np.random.SeedSequence([int(seed), int(rate_index), int(run_index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_instance(spec: BenchSpec, rate, seed):
    if spec.application is Application.REGISTRATION:
        return generate_registration(RegistrationInstanceSpec(
            n=spec.point_count, sigma=spec.sigma, outlier_rate=rate, seed=seed, ply_path=spec.ply_path))
    return generate_shape_alignment(ShapeInstanceSpec(
        n=spec.point_count, sigma=spec.sigma, outlier_rate=rate, seed=seed))


def make_problem(application, data):
    if Application(application) is Application.REGISTRATION:
        return RegistrationProblem(*data)
    return ShapeAlignmentProblem(*data)


def run_method(method, application, data, c_bar, seed=0, ransac_max_iterations=None) -> MethodOutcome:
    """Run one estimator on raw correspondence arrays ``data``.

    ``data`` is ``(src, dst)`` for registration and ``(z, B)`` for shape
    alignment. Solver exceptions propagate.
    """
    method = Method(method)
    application = Application(application)
    problem = make_problem(application, data)
    n = problem.measurement_count
    start = time.perf_counter()
    if method is Method.RANSAC:
        if ransac_max_iterations is None:
            ransac_max_iterations = 1000 if application is Application.REGISTRATION else 100
        config = RansacConfig(c_bar, max_iterations=ransac_max_iterations, seed=seed)
        runner = ransac_registration if application is Application.REGISTRATION else ransac_shape_alignment
        res = runner(*data, config)
        out = MethodOutcome(res.estimate, res.inlier_mask, res.iterations_used, True)
    elif method is Method.LS:
        estimate = problem.solve_weighted(np.ones(n))
        out = MethodOutcome(estimate, np.ones(n, dtype=bool), 1, True)
    else:
        config = GncConfig.gm(c_bar) if method is Method.GNC_GM else GncConfig.tls(c_bar)
        res = run_gnc(problem, config)
        out = MethodOutcome(res.estimate, res.inlier_mask, res.outer_iterations, res.converged)
    out.wall_time_ms = 1000.0 * (time.perf_counter() - start)
    return out


def _precision_recall(predicted, outlier_mask):
    truth = ~outlier_mask
    tp = int(np.sum(predicted & truth))
    n_pred = int(predicted.sum())
    n_true = int(truth.sum())
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_true if n_true else 0.0
    return precision, recall


def run_cell(spec: BenchSpec, rate_index: int, run_index: int) -> list[BenchRecord]:
    """All methods of the sweep on the instance of one (rate, run) cell."""
    rate = spec.outlier_rates[rate_index]
    seed = derive_seed(spec.seed, rate_index, run_index)
    inst = make_instance(spec, rate, seed)
    registration = spec.application is Application.REGISTRATION
    data = (inst.src, inst.dst) if registration else (inst.z, inst.B)
    records = []
    for method in spec.methods:
        try:
            out = run_method(method, spec.application, data, spec.noise_bound, seed, spec.ransac_iterations)
        except GncError:
            records.append(BenchRecord(
                method.value, rate, run_index, FAILED, FAILED, None if registration else FAILED,
                0, 0.0, False, 0.0, 0.0))
            continue
        errs = (registration_errors if registration else shape_errors)(out.estimate, inst.ground_truth)
        precision, recall = _precision_recall(out.inlier_mask, inst.outlier_mask)
        records.append(BenchRecord(
            method.value, rate, run_index, errs.rotation_error_deg, errs.translation_error,
            errs.scale_error, out.iterations, out.wall_time_ms, out.converged, precision, recall))
    return records


def _run_cell_args(args):
    return run_cell(*args)


def run_benchmark(spec: BenchSpec, jobs: int = 1) -> list[BenchRecord]:
    """Run the full sweep; ``jobs > 1`` spreads cells over worker processes."""
    cells = [(spec, i, k) for i in range(len(spec.outlier_rates)) for k in range(spec.runs_per_rate)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_cell_args, cells))
    else:
        chunks = [run_cell(*c) for c in cells]
    return [rec for chunk in chunks for rec in chunk]


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_csv(records, fh):
    """Write records with the fixed header to an open text file."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        row = asdict(rec)
        writer.writerow([_fmt(row[name]) for name in CSV_HEADER])


def records_to_csv(records) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


def read_csv(fh) -> list[BenchRecord]:
    """Parse a CSV produced by :func:`write_csv`.

    Raises:
        ValueError: on a wrong header or malformed row.
    """
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header: {header}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise ValueError(f"line {lineno}: expected {len(CSV_HEADER)} columns")
        vals = dict(zip(CSV_HEADER, row))
        try:
            out.append(BenchRecord(
                method=vals["method"],
                outlier_rate=float(vals["outlier_rate"]),
                run_index=int(vals["run_index"]),
                rotation_error_deg=float(vals["rotation_error_deg"]),
                translation_error=float(vals["translation_error"]),
                scale_error=float(vals["scale_error"]) if vals["scale_error"] else None,
                outer_iterations=int(vals["outer_iterations"]),
                wall_time_ms=float(vals["wall_time_ms"]),
                converged=vals["converged"] == "true",
                precision=float(vals["precision"]),
                recall=float(vals["recall"]),
            ))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return out


@dataclass(frozen=True)
class SummaryRow:
    method: str
    outlier_rate: float
    runs: int
    median_rotation_error_deg: float
    max_rotation_error_deg: float
    median_translation_error: float
    max_translation_error: float
    median_scale_error: Optional[float]
    max_scale_error: Optional[float]
    mean_outer_iterations: float
    mean_wall_time_ms: float


def summarize(records) -> list[SummaryRow]:
    """Median and max errors per (method, rate), in first-seen order."""
    groups = {}
    for rec in records:
        groups.setdefault((rec.method, rec.outlier_rate), []).append(rec)
    rows = []
    for (method, rate), recs in groups.items():
        rot = np.array([r.rotation_error_deg for r in recs])
        tra = np.array([r.translation_error for r in recs])
        scales = [r.scale_error for r in recs if r.scale_error is not None]
        rows.append(SummaryRow(
            method, rate, len(recs),
            float(np.median(rot)), float(rot.max()),
            float(np.median(tra)), float(tra.max()),
            float(np.median(scales)) if scales else None,
            float(np.max(scales)) if scales else None,
            float(np.mean([r.outer_iterations for r in recs])),
            float(np.mean([r.wall_time_ms for r in recs])),
        ))
    return rows


def format_summary(rows) -> str:
    cols = [f.name for f in fields(SummaryRow)]
    lines = [",".join(cols)]
    for row in rows:
        vals = []
        for name in cols:
            v = getattr(row, name)
            vals.append("" if v is None else (f"{v:.6g}" if isinstance(v, float) else str(v)))
        lines.append(",".join(vals))
    return "\n".join(lines)
