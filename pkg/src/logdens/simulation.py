"""Monte Carlo comparison of the boundary estimators.

Each replication ``r`` of design ``d`` draws its sample from a random stream
seeded by ``SeedSequence(seed, spawn_key=(d, r))``, so results do not depend
on execution order or on the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .asymptotics import (
    CHI_INTERIOR,
    bandwidth_interpolate,
    boundary_chi,
    optimal_bandwidth,
    optimal_chi,
)
from .comparators import (
    KZ_CUBIC,
    cjm_kernel,
    kz_density,
    kz_pilot_slope,
    loader_density,
    local_linear_kernel,
    ls_cjm_density,
)
from .designs import DESIGN_IDS, Design
from .errors import ConfigurationError, LogDensError
from .estimator import EvalRequest, Sample, estimate_density
from .kernels import EPANECHNIKOV, PS1, PS2, PS3, equivalent_kernel_poly, omega_system

log = logging.getLogger(__name__)

ESTIMATORS = ("ls_cjm", "ps1", "ps2", "ps3", "kz", "loader")
TARGETS = ("f", "f_prime")
_PS = {"ps1": PS1, "ps2": PS2, "ps3": PS3}


def kz_pilot_factor() -> float:
    """Ratio ``h_L' / h0`` matching the pilot slope variance to PS1's at the boundary.

    The pilot ``(log f(2h) - log f_b(0)) / (2h)`` has variance
    ``(R_epan + R_bnd) / (4 f n h^3)``; PS1's slope at ``z = 0`` has
    ``[(Omega' V^-1 Omega)^-1] / (f n h0^3)``.
    """
    r_epan = equivalent_kernel_poly(EPANECHNIKOV, PS1, 1, 1.0).roughness()
    r_bnd = equivalent_kernel_poly(EPANECHNIKOV, PS2, 1, 0.0).roughness()
    v_ps1 = float(omega_system(PS1, 1, 0.0).beta_cov[0, 0])
    return ((r_epan + r_bnd) / (4.0 * v_ps1)) ** (1.0 / 3.0)


@dataclass(frozen=True)
class McConfig:
    seed: int
    designs: tuple[str, ...] = DESIGN_IDS
    theta: float = 4.0
    reps: int = 2000
    n: int = 500
    estimators: tuple[str, ...] = ESTIMATORS
    grid_points: int = 41
    grid: tuple[float, ...] | None = None
    workers: int = 1
    bandwidth_anchor: float = 0.0
    kz_cubic: float = KZ_CUBIC
    kz_pilot_factor: float | None = None

    def __post_init__(self):
        if self.seed is None or int(self.seed) != self.seed or self.seed < 0:
            raise ConfigurationError("a nonnegative integer seed is required")
        if self.reps < 1:
            raise ConfigurationError("reps must be >= 1")
        if self.n < 2:
            raise ConfigurationError("n must be >= 2")
        if self.grid is None and self.grid_points < 1:
            raise ConfigurationError("grid_points must be >= 1")
        object.__setattr__(self, "designs", tuple(d.upper() for d in self.designs))
        object.__setattr__(self, "estimators", tuple(e.lower() for e in self.estimators))
        for d in self.designs:
            if d not in DESIGN_IDS:
                raise ConfigurationError(f"unknown design {d!r}")
        for e in self.estimators:
            if e not in ESTIMATORS:
                raise ConfigurationError(f"unknown estimator {e!r}; choose from {ESTIMATORS}")
        if self.grid is not None:
            g = tuple(float(v) for v in self.grid)
            if not g or any(v < 0 for v in g) or list(g) != sorted(g):
                raise ConfigurationError("grid must be a nonempty sorted list of points >= 0")
            object.__setattr__(self, "grid", g)
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")


def study_config(seed: int, **overrides) -> McConfig:
    """Full study: four designs, theta = 4, 2000 samples of 500, 41 grid points."""
    return McConfig(seed=seed, **overrides)


def _chis(estimator: str) -> tuple[float, float]:
    """(boundary, interior) AMSE-optimal ``chi`` of each estimator's equivalent kernel."""
    if estimator in _PS:
        return boundary_chi(_PS[estimator]), CHI_INTERIOR
    if estimator == "loader":
        return optimal_chi(local_linear_kernel(0.0)), optimal_chi(local_linear_kernel(1.0))
    if estimator == "ls_cjm":
        return optimal_chi(cjm_kernel(0.0)), optimal_chi(cjm_kernel(1.0))
    raise ConfigurationError(f"no bandwidth rule for {estimator!r}")


@dataclass(frozen=True)
class DesignPlan:
    """Oracle bandwidths for one design.

    ``h0`` and ``h1`` map estimator names to boundary and interior bandwidths;
    KZ uses the constant ``h1`` of PS1 and a pilot bandwidth ``h_kz_pilot``.
    """

    design: str
    theta: float
    h0: dict
    h1: dict
    h_kz_pilot: float
    grid: tuple[float, ...]

    def bandwidth(self, estimator: str, x: float) -> float:
        if estimator == "kz":
            return self.h1["kz"]
        return bandwidth_interpolate(x, self.h0[estimator], self.h1[estimator])


def plan_design(config: McConfig, design_id: str) -> DesignPlan:
    """Oracle bandwidths and evaluation grid for one design.

    Every estimator gets its own asymptotically optimal ``h = chi (n f c^2)^(-1/5)``
    at ``z = 0`` and ``z = 1``, where ``c = L''`` for the log-linear methods and
    ``c = f''/f`` for the CDF fit.  PS3 has no finite optimum at the boundary and
    uses the variance-matching rule.
    """
    d = Design(design_id, config.theta)
    x0 = config.bandwidth_anchor
    f0 = d.density(x0)
    curvature = {"log": d.log_second_deriv(x0), "cdf": d.density_second_deriv(x0) / f0}
    h0, h1 = {}, {}
    for name in ESTIMATORS:
        if name == "kz":
            continue
        c = curvature["cdf" if name == "ls_cjm" else "log"]
        chi0, chi1 = _chis(name)
        h0[name] = optimal_bandwidth(chi0, f0, c, config.n)
        h1[name] = optimal_bandwidth(chi1, f0, c, config.n)
    h1["kz"] = h1["ps1"]
    factor = kz_pilot_factor() if config.kz_pilot_factor is None else config.kz_pilot_factor
    if config.grid is not None:
        grid = config.grid
    elif config.grid_points == 1:
        grid = (0.0,)
    else:
        grid = tuple(float(v) for v in np.linspace(0.0, 2.0 * h1["ps2"], config.grid_points))
    if d.id == "F1" and grid[-1] > 5.0:
        raise ConfigurationError("grid extends beyond the F1 support")
    return DesignPlan(d.id, config.theta, h0, h1, factor * h0["ps2"], grid)


def _one_estimate(name: str, sample: Sample, x: float, h: float, plan: DesignPlan,
                  config: McConfig, kz_slope) -> tuple[float, float]:
    if name in _PS:
        est = estimate_density(sample, EvalRequest(x, h, 1, _PS[name], EPANECHNIKOV))
        return est.f_hat, est.f_prime_hat
    if name == "loader":
        f, lp = loader_density(sample, x, h)
        return f, f * lp
    if name == "ls_cjm":
        res = ls_cjm_density(sample, x, h)
        return res.f, res.f_prime
    res = kz_density(sample, x, h, plan.h_kz_pilot, cubic=config.kz_cubic,
                     d_hat=kz_slope if kz_slope is not None else 0.0)
    return res.f, res.f_prime


def replicate(config: McConfig, plan: DesignPlan, design_index: int, r: int):
    """Estimates for replication ``r``: arrays ``(E, P)`` for f and f', plus error codes."""
    ss = np.random.SeedSequence(config.seed, spawn_key=(design_index, r))
    rng = np.random.Generator(np.random.PCG64(ss))
    d = Design(plan.design, plan.theta)
    sample = Sample(d.sample(config.n, rng))
    E, P = len(config.estimators), len(plan.grid)
    est_f = np.full((E, P), np.nan)
    est_fp = np.full((E, P), np.nan)
    codes: dict[tuple[int, int], str] = {}
    kz_slope = None
    pilot_failed = False
    if "kz" in config.estimators:
        kz_slope = kz_pilot_slope(sample, plan.h_kz_pilot)
        pilot_failed = kz_slope is None
    for e, name in enumerate(config.estimators):
        for p, x in enumerate(plan.grid):
            h = plan.bandwidth(name, x)
            try:
                est_f[e, p], est_fp[e, p] = _one_estimate(name, sample, x, h, plan, config, kz_slope)
            except LogDensError as exc:
                codes[(e, p)] = exc.code
    return est_f, est_fp, codes, pilot_failed


def _run_chunk(args):
    config, plan, design_index, reps = args
    return [replicate(config, plan, design_index, r) for r in reps]


@dataclass
class McCell:
    design: str
    estimator: str
    target: str
    x: float
    z: float
    h: float
    bias: float
    rmse: float
    n_valid: int
    n_errors: int


@dataclass
class McResult:
    config: McConfig
    plans: dict[str, DesignPlan] = field(default_factory=dict)
    cells: list[McCell] = field(default_factory=list)
    error_codes: dict[str, int] = field(default_factory=dict)
    kz_pilot_failures: dict[str, int] = field(default_factory=dict)

    def cell(self, design: str, estimator: str, target: str = "f", x: float = 0.0) -> McCell:
        for c in self.cells:
            if (c.design == design and c.estimator == estimator and c.target == target
                    and math.isclose(c.x, x, rel_tol=0, abs_tol=1e-12)):
                return c
        raise KeyError((design, estimator, target, x))

    def table(self, target: str = "f", x: float = 0.0) -> dict[str, dict[str, float]]:
        """``{estimator: {design: rmse}}`` at evaluation point ``x``."""
        out: dict[str, dict[str, float]] = {}
        for c in self.cells:
            if c.target == target and math.isclose(c.x, x, abs_tol=1e-12):
                out.setdefault(c.estimator, {})[c.design] = c.rmse
        return out


def _worker_count(config: McConfig) -> int:
    cap = os.environ.get("LOGDENS_THREADS")
    workers = config.workers
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            raise ConfigurationError(f"LOGDENS_THREADS must be an integer, got {cap!r}") from None
    return workers


def run_monte_carlo(config: McConfig, progress=None) -> McResult:
    """Run every design in ``config`` and aggregate bias and RMSE per cell."""
    result = McResult(config)
    workers = _worker_count(config)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for di, design_id in enumerate(config.designs):
            plan = plan_design(config, design_id)
            result.plans[design_id] = plan
            design_index = DESIGN_IDS.index(design_id)
            reps = list(range(config.reps))
            if pool is None:
                outputs = _run_chunk((config, plan, design_index, reps))
            else:
                chunks = [reps[i::workers] for i in range(workers)]
                parts = list(pool.map(_run_chunk, [(config, plan, design_index, c) for c in chunks]))
                outputs = [None] * config.reps
                for c, part in zip(chunks, parts):
                    for r, out in zip(c, part):
                        outputs[r] = out
            _aggregate(result, config, plan, outputs)
            if progress is not None:
                progress(design_id, di + 1, len(config.designs))
    finally:
        if pool is not None:
            pool.shutdown()
    return result


def _aggregate(result: McResult, config: McConfig, plan: DesignPlan, outputs) -> None:
    d = Design(plan.design, plan.theta)
    grid = np.array(plan.grid)
    truth = {"f": np.asarray(d.density(grid), dtype=float).reshape(-1),
             "f_prime": np.asarray(d.density_deriv(grid), dtype=float).reshape(-1)}
    stacked = {"f": np.stack([o[0] for o in outputs]), "f_prime": np.stack([o[1] for o in outputs])}
    failures = 0
    for o in outputs:
        failures += int(o[3])
        for code in o[2].values():
            result.error_codes[code] = result.error_codes.get(code, 0) + 1
    result.kz_pilot_failures[plan.design] = failures
    for e, name in enumerate(config.estimators):
        for target in TARGETS:
            # (P, R) with replications contiguous
            err = np.ascontiguousarray((stacked[target][:, e, :] - truth[target]).T)
            for p, x in enumerate(plan.grid):
                row = err[p]
                valid = row[np.isfinite(row)]
                n_valid = valid.size
                bias = float(np.mean(valid)) if n_valid else math.nan
                rmse = float(np.sqrt(np.mean(valid * valid))) if n_valid else math.nan
                h = plan.bandwidth(name, x)
                result.cells.append(McCell(plan.design, name, target, float(x), min(x / h, 1.0), h,
                                           bias, rmse, n_valid, config.reps - n_valid))


CSV_COLUMNS = ("design", "estimator", "target", "x", "z", "h", "bias", "rmse", "n_valid", "n_errors")


def fmt(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def summarize(result: McResult | None, fh=None) -> str:
    """CSV text with one row per (design, estimator, target, x); also written to ``fh``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    if result is not None:
        for c in result.cells:
            row = asdict(c)
            w.writerow([fmt(row[k]) for k in CSV_COLUMNS])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
