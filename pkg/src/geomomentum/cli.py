"""geomomentum command line.

    geomomentum geometry-check --surface torus:R=2,rho=0.5
    geomomentum sphere-algebra --N 3 --lmax 10
    geomomentum extract-alpha --N 2 --lmax 12
    geomomentum alpha-survey --N 3 --lmax 10
    geomomentum spectrum --N 3 --lmax 10 --format json

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration error.
Every flag may also be given in a ``--config`` file of ``key = value`` lines;
flags on the command line win.
"""

import argparse
import configparser
import csv
import io
import json
import logging
import pathlib
import sys
from dataclasses import dataclass

import numpy as np

from . import algebra, geometry, spectra
from .geometry import PhysicalParams, SurfaceSpecError
from .sphere_ops import BasisError, build_operator_set

log = logging.getLogger("geomomentum")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "surface": None,
    "N": 3,
    "lmax": 10,
    "margin": 2,
    "radius": 1.0,
    "hbar": 1.0,
    "mass": 1.0,
    "tol": None,
    "seed": 0,
    "samples": 8,
    "h": None,
    "alpha": None,
    "out": None,
    "format": None,
    "dump": None,
}

CASTS = {"N": int, "lmax": int, "margin": int, "seed": int, "samples": int,
         "radius": float, "hbar": float, "mass": float, "tol": float, "h": float, "alpha": float}


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    surface: str = None
    N: int = 3
    lmax: int = 10
    margin: int = 2
    radius: float = 1.0
    hbar: float = 1.0
    mass: float = 1.0
    tol: float = None
    seed: int = 0
    samples: int = 8
    h: float = None
    alpha: float = None
    out: str = None
    format: str = None
    dump: str = None

    @property
    def params(self):
        return PhysicalParams(hbar=self.hbar, mass=self.mass, radius=self.radius)

    def validate(self):
        if self.lmax < 4:
            raise UsageError(f"--lmax must be >= 4, got {self.lmax}")
        if self.margin < 1:
            raise UsageError(f"--margin must be >= 1, got {self.margin}")
        if self.lmax - self.margin < 2:
            raise UsageError(f"--margin {self.margin} leaves no interior at --lmax {self.lmax}")
        if self.samples < 1:
            raise UsageError("--samples must be >= 1")
        if self.tol is not None and self.tol <= 0:
            raise UsageError("--tol must be positive")
        if self.h is not None and self.h <= 0:
            raise UsageError("--h must be positive")
        try:
            self.params
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if self.command != "geometry-check" and self.N not in (2, 3):
            raise UsageError(f"operator route supports --N 2 or 3, got {self.N}")
        if self.command == "geometry-check" and not self.surface:
            raise UsageError("geometry-check needs --surface")
        if self.format not in (None, "json", "csv"):
            raise UsageError(f"--format must be json or csv, got {self.format}")
        return self


def read_config(path):
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_string("[run]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    out = {}
    for key, val in parser["run"].items():
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"unknown config key {key!r} in {path}")
        try:
            out[key] = CASTS.get(key, str)(val)
        except ValueError:
            raise UsageError(f"bad value {val!r} for {key} in {path}") from None
    return out


def build_config(args):
    merged = dict(DEFAULTS)
    if args.config:
        merged.update(read_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return RunConfig(command=args.command, **merged).validate()


def _emit(text, cfg):
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(obj):
    return json.dumps(obj, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def cmd_geometry_check(cfg):
    try:
        surface = geometry.parse_surface(cfg.surface)
    except SurfaceSpecError as exc:
        raise UsageError(str(exc)) from None
    tol = 1e-4 if cfg.tol is None else cfg.tol
    records = []
    for x in surface.sample(cfg.samples, seed=cfg.seed):
        rec = geometry.surface_record(surface, x, cfg.params, cfg.h)
        rec["order"] = {
            "divergence": geometry.convergence_order(geometry.check_divergence_identity, surface, x, rec["h"]),
            "lb_position": geometry.convergence_order(geometry.check_lb_position_identity, surface, x, rec["h"]),
        }
        rec["passed"] = all(v < tol for v in rec["residuals"].values())
        records.append(rec)
    passed = all(r["passed"] for r in records)
    report = {"surface": surface.spec, "tol": tol, "seed": cfg.seed, "hbar": cfg.hbar,
              "mass": cfg.mass, "records": records, "passed": passed}
    _emit(json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n", cfg)
    return EXIT_OK if passed else EXIT_FAIL


def _operators(cfg):
    return build_operator_set(cfg.N, cfg.lmax, cfg.params)


def cmd_sphere_algebra(cfg):
    ops = _operators(cfg)
    reports = algebra.run_all(ops, cfg.margin, cfg.tol)
    _emit("".join(_dumps(r.to_dict()) + "\n" for r in reports), cfg)
    if cfg.dump:
        _dump_operators(ops, cfg)
    for r in reports:
        log.info("%-45s %.3e %s", r.label, r.residual, "pass" if r.passed else "FAIL")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _dump_operators(ops, cfg):
    d = pathlib.Path(cfg.dump)
    d.mkdir(parents=True, exist_ok=True)
    for op in (*ops.x, *ops.p, ops.hamiltonian(algebra.true_alpha(ops.N))):
        name = op.label.replace("(", "_").replace(")", "")
        (d / f"{name}.json").write_text(op.to_json())


def cmd_extract_alpha(cfg):
    ops = _operators(cfg)
    tol = algebra.ALPHA_TOL if cfg.tol is None else cfg.tol
    alpha, report = algebra.extract_alpha(ops, cfg.margin, tol)
    if cfg.format == "json":
        _emit(_dumps(report.to_dict()) + "\n", cfg)
    else:
        _emit(
            f"alpha = {round(alpha, 6) + 0.0:.6f}\n"
            f"residual = {report.detail['residual_at_optimum']:.3e}\n"
            f"target = {report.detail['target']:.6f}\n",
            cfg,
        )
    return EXIT_OK if report.passed else EXIT_FAIL


def survey_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["candidate", "formula", "alpha", "residual", "pass"])
    for row in rows:
        formula = row.formula
        if row.params:
            formula += " [" + ",".join(f"{k}={v:g}" for k, v in row.params.items()) + "]"
        w.writerow([row.candidate, formula, repr(row.alpha), f"{row.residual:.6e}", str(row.passed).lower()])
    return buf.getvalue()


def cmd_alpha_survey(cfg):
    ops = _operators(cfg)
    tol = algebra.DEFAULT_TOL if cfg.tol is None else cfg.tol
    rows = algebra.alpha_survey(ops, cfg.margin, tol)
    if cfg.format == "json":
        _emit(_dumps([r.__dict__ for r in rows]) + "\n", cfg)
    else:
        _emit(survey_csv(rows), cfg)
    target = algebra.true_alpha(cfg.N)
    ok = all(r.passed == (abs(r.alpha - target) < 1e-12) for r in rows)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_spectrum(cfg):
    alpha = algebra.true_alpha(cfg.N) if cfg.alpha is None else cfg.alpha
    ops = _operators(cfg)
    table = spectra.spectrum(ops.hamiltonian(alpha), alpha=alpha, tol=cfg.tol, params=cfg.params)
    _emit(table.to_json() + "\n" if cfg.format == "json" else table.to_csv(), cfg)
    dev = spectra.compare_to_analytic(table)
    bad = spectra.degeneracy_mismatches(table)
    log.info("max deviation from closed form %.3e; degeneracy mismatches %s", dev, bad)
    return EXIT_OK if dev < 1e-10 and not bad else EXIT_FAIL


COMMANDS = {
    "geometry-check": cmd_geometry_check,
    "sphere-algebra": cmd_sphere_algebra,
    "extract-alpha": cmd_extract_alpha,
    "alpha-survey": cmd_alpha_survey,
    "spectrum": cmd_spectrum,
}


def _common(p):
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--N", type=int, dest="N", help="ambient dimension (2 or 3 for operators)")
    p.add_argument("--lmax", type=int, help="basis cutoff (>= 4)")
    p.add_argument("--margin", type=int, help="interior margin in levels (default 2)")
    p.add_argument("--radius", type=float)
    p.add_argument("--hbar", type=float)
    p.add_argument("--mass", type=float)
    p.add_argument("--tol", type=float, help="override the default tolerance(s)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("-v", "--verbose", action="store_true")


def make_parser():
    parser = argparse.ArgumentParser(prog="geomomentum", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _common(p)
        if name == "geometry-check":
            p.add_argument("--surface", help='e.g. "sphere:N=3,r=2", "torus:R=2,rho=0.5"')
            p.add_argument("--samples", type=int, help="number of sample points (default 8)")
            p.add_argument("--h", type=float, help="finite-difference step (default 1e-4 x curvature radius)")
        if name == "sphere-algebra":
            p.add_argument("--dump", help="directory for JSON operator dumps")
        if name == "spectrum":
            p.add_argument("--alpha", type=float, help="default (N-1)(N-3)/4")
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = build_config(args)
        return COMMANDS[cfg.command](cfg)
    except (UsageError, SurfaceSpecError, BasisError) as exc:
        print(f"geomomentum {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
