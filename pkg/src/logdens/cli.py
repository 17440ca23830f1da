"""Command-line front end: ``estimate``, ``asymptotics`` and ``simulate``.

All output is CSV on stdout (or ``--out``) with 17 significant digits and LF
line endings.  Exit codes: 0 success, 1 invalid input or configuration,
2 estimation failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import simulation
from .asymptotics import (
    CHI_INTERIOR,
    boundary_chi,
    density_constants,
    optimal_bandwidth,
    optimal_chi,
)
from .errors import ConfigurationError, LogDensError
from .estimator import DENOM_METHODS, EvalRequest, Sample, estimate_curve, estimate_density
from .kernels import FAMILIES, KERNELS, c_moments, equivalent_kernel_poly, get_family, get_kernel, omega_system

EXIT_OK, EXIT_INPUT, EXIT_ESTIMATION = 0, 1, 2


class InputError(Exception):
    pass


def _fmt(v) -> str:
    return simulation.fmt(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _write_rows(header, rows, out) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    out.write(buf.getvalue())


def read_observations(path: str) -> np.ndarray:
    """One number per line; blank lines and ``#`` comments are ignored."""
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            v = float(line)
        except ValueError:
            raise InputError(f"{path}:{lineno}: not a number: {line!r}") from None
        if not math.isfinite(v):
            raise InputError(f"{path}:{lineno}: non-finite value")
        values.append(v)
    if not values:
        raise InputError(f"{path}: no observations")
    return np.array(values)


def _parse_grid(spec: str) -> np.ndarray:
    """``a:b:k`` for k points from a to b, or a comma-separated list."""
    try:
        if ":" in spec:
            a, b, k = spec.split(":")
            return np.linspace(float(a), float(b), int(k))
        return np.array(sorted(float(v) for v in spec.split(",")))
    except ValueError:
        raise InputError(f"malformed grid {spec!r}; use a:b:k or x1,x2,...") from None


def auto_bandwidth(sample: Sample, family, lpp: float | None = None) -> tuple[float, float]:
    """Data-driven ``(h0, h1)`` without knowledge of the truth.

    The curvature ``L''`` defaults to the normal reference ``-1/sigma^2`` with a
    robust scale; the density at the support bound comes from a PS2 pilot at
    the boundary-optimal normal-reference bandwidth.
    """
    x = sample.values
    iqr = float(np.subtract(*np.percentile(x, [75, 25])))
    sd = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    sigma = min(s for s in (sd, iqr / 1.349) if s > 0) if max(sd, iqr) > 0 else 1.0
    if lpp is None:
        lpp = -1.0 / sigma**2
    h_pilot = 2.0 * CHI_INTERIOR * sigma * sample.n ** -0.2
    f0 = estimate_density(sample, EvalRequest(sample.lower, h_pilot, 1, "ps2")).f_hat
    if not f0 > 0:
        f0 = 1.0 / (sigma * math.sqrt(2.0 * math.pi))
    chi0 = boundary_chi(family)
    return optimal_bandwidth(chi0, f0, lpp, sample.n), optimal_bandwidth(CHI_INTERIOR, f0, lpp, sample.n)


# ---------------------------------------------------------------------------
# estimate


def cmd_estimate(args, out) -> int:
    data = read_observations(args.input)
    try:
        sample = Sample(data, lower=args.lower)
    except ConfigurationError as exc:
        raise InputError(str(exc)) from None
    if args.x is not None:
        grid = np.array([args.x])
    elif args.grid is not None:
        grid = _parse_grid(args.grid)
    else:
        raise InputError("one of --x or --grid is required")
    if args.h is not None:
        bandwidth = args.h
    elif args.auto_h:
        bandwidth = auto_bandwidth(sample, args.g, args.Lpp)
    else:
        raise InputError("one of --h or --auto-h is required")
    ests = estimate_curve(sample, grid, bandwidth, args.S, args.g, args.m, args.denom)
    header = ["x", "z", "h", "f_hat", "L_hat"] + [f"beta_{s}" for s in range(1, args.S + 1)]
    header += ["f_prime_hat", "status"]
    rows = []
    for e in ests:
        betas = list(e.beta.beta) if e.beta is not None else [math.nan] * args.S
        L = e.L_hat if e.L_hat is not None else (-math.inf if e.status == "empty_window" else math.nan)
        rows.append([e.x, e.z, e.h, e.f_hat, L, *betas, e.f_prime_hat, e.status])
    _write_rows(header, rows, out)
    failed = [e for e in ests if not e.ok]
    if len(failed) == len(ests):
        codes = sorted({e.status for e in failed})
        print(f"error: estimation failed at every point ({', '.join(codes)})", file=sys.stderr)
        return EXIT_ESTIMATION
    return EXIT_OK


# ---------------------------------------------------------------------------
# asymptotics


def cmd_asymptotics(args, out) -> int:
    family, m = get_family(args.g), get_kernel(args.m)
    if not 0.0 <= args.z <= 1.0:
        raise InputError("--z must lie in [0, 1]")
    system = omega_system(family, args.S, args.z)
    c = c_moments(m, args.S, args.z)
    omega = equivalent_kernel_poly(m, family, args.S, args.z)
    bias_const, rough = density_constants(m, family, args.S, args.z)
    rows: list[list] = []
    for j in range(args.S):
        for s in range(args.S):
            rows.append(["Omega", f"{j + 1},{s + 1}", system.omega[j, s]])
    for j in range(args.S):
        rows.append(["Omega_next", f"{j + 1}", system.omega_next[j]])
    for j in range(args.S):
        for k in range(args.S):
            rows.append(["V", f"{j + 1},{k + 1}", system.V[j, k]])
    for s in range(args.S):
        rows.append(["b", f"{s + 1}", system.b[s]])
    for s in range(args.S):
        for k in range(args.S):
            rows.append(["beta_cov", f"{s + 1},{k + 1}", system.beta_cov[s, k]])
    for s in range(args.S):
        rows.append(["c", f"{s + 1}", c[s]])
    for k, v in enumerate(omega.coefficients()):
        rows.append(["omega_coef", f"t^{k}", v])
    for t in np.linspace(-args.z, 1.0, 5):
        rows.append(["omega_value", _fmt(float(t)), omega(float(t))])
    rows.append(["bias_ratio", "", bias_const])
    rows.append(["roughness", "", rough])
    if args.f is not None:
        rows.append(["var_density", "", args.f * rough])
        if args.Lpp is not None and args.n is not None and args.S == 1:
            chi = optimal_chi(omega)
            rows.append(["optimal_chi", "", chi])
            if math.isfinite(chi):
                rows.append(["optimal_h", "", optimal_bandwidth(chi, args.f, args.Lpp, args.n)])
    _write_rows(["quantity", "index", "value"], rows, out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate

_INT_KEYS = ("seed", "reps", "n", "grid_points", "workers")
_FLOAT_KEYS = ("theta", "bandwidth_anchor", "kz_cubic", "kz_pilot_factor")
_LIST_KEYS = ("designs", "estimators")


def load_config_file(path: str) -> dict:
    """``[simulation]`` section of an INI file as keyword arguments for McConfig."""
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    if not parser.has_section("simulation"):
        raise InputError(f"{path}: missing [simulation] section")
    out: dict = {}
    for key, raw in parser.items("simulation"):
        try:
            if key in _INT_KEYS:
                out[key] = int(raw)
            elif key in _FLOAT_KEYS:
                out[key] = float(raw)
            elif key in _LIST_KEYS:
                out[key] = tuple(v.strip() for v in raw.split(",") if v.strip())
            elif key == "grid":
                out[key] = tuple(float(v) for v in raw.split(","))
            else:
                raise InputError(f"{path}: unknown key {key!r}")
        except ValueError:
            raise InputError(f"{path}: bad value for {key}: {raw!r}") from None
    return out


def cmd_simulate(args, out) -> int:
    kwargs: dict = {}
    if args.config:
        kwargs.update(load_config_file(args.config))
    for key in ("reps", "n", "grid_points", "workers", "theta"):
        v = getattr(args, key)
        if v is not None:
            kwargs[key] = v
    if args.designs:
        kwargs["designs"] = tuple(args.designs.split(","))
    if args.estimators:
        kwargs["estimators"] = tuple(args.estimators.split(","))
    if args.seed is not None:
        kwargs["seed"] = args.seed
    if "seed" not in kwargs:
        raise InputError("--seed is required (or seed = ... in the config file)")
    config = simulation.study_config(**kwargs) if args.paper else simulation.McConfig(**kwargs)

    def progress(design, done, total):
        print(f"[{done}/{total}] design {design} finished", file=sys.stderr, flush=True)

    result = simulation.run_monte_carlo(config, progress=progress)
    if result.error_codes:
        summary = ", ".join(f"{k}={v}" for k, v in sorted(result.error_codes.items()))
        print(f"estimator errors: {summary}", file=sys.stderr)
    simulation.summarize(result, out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="logdens", description="Local log-polynomial density estimation")
    p.add_argument("--out", help="write CSV here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("estimate", help="estimate f, log f and f' from data")
    e.add_argument("input", help="file with one observation per line ('-' for stdin)")
    where = e.add_mutually_exclusive_group()
    where.add_argument("--x", type=float, help="single evaluation point")
    where.add_argument("--grid", help="a:b:k or comma-separated points")
    bw = e.add_mutually_exclusive_group()
    bw.add_argument("--h", type=float, help="fixed bandwidth")
    bw.add_argument("--auto-h", action="store_true", help="normal-reference boundary/interior bandwidths")
    e.add_argument("--Lpp", type=float, help="curvature L'' used by --auto-h instead of the normal reference")
    e.add_argument("--S", type=int, default=1)
    e.add_argument("--g", choices=sorted(FAMILIES), default="ps1")
    e.add_argument("--m", choices=sorted(KERNELS), default="epan")
    e.add_argument("--denom", choices=DENOM_METHODS, default="auto")
    e.add_argument("--lower", type=float, default=0.0, help="left support bound (default 0)")

    a = sub.add_parser("asymptotics", help="kernel constants and limit-law quantities")
    a.add_argument("--S", type=int, default=1)
    a.add_argument("--z", type=float, default=1.0)
    a.add_argument("--g", choices=sorted(FAMILIES), default="ps1")
    a.add_argument("--m", choices=sorted(KERNELS), default="epan")
    a.add_argument("--f", type=float, help="density at x")
    a.add_argument("--Lpp", type=float, help="L''(x)")
    a.add_argument("--n", type=int, help="sample size")

    s = sub.add_parser("simulate", help="Monte Carlo comparison of boundary estimators")
    s.add_argument("--config", help="INI file with a [simulation] section")
    s.add_argument("--paper", action="store_true", help="full study: 4 designs, 2000 reps, n=500, 41 points")
    s.add_argument("--seed", type=int)
    s.add_argument("--reps", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--theta", type=float)
    s.add_argument("--grid-points", dest="grid_points", type=int)
    s.add_argument("--workers", type=int)
    s.add_argument("--designs", help="comma-separated subset of F1,F2,F3,F4")
    s.add_argument("--estimators", help="comma-separated subset of " + ",".join(simulation.ESTIMATORS))
    return p


_COMMANDS = {"estimate": cmd_estimate, "asymptotics": cmd_asymptotics, "simulate": cmd_simulate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    buf = io.StringIO()
    try:
        if getattr(args, "S", 1) < 1:
            raise InputError("--S must be >= 1")
        code = _COMMANDS[args.command](args, buf)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LogDensError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
