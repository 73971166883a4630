"""Command-line front door: CBC construction, studies, and a self-test."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .experiments import (
    StudyConfig,
    derive_for_family,
    fit_rate,
    run_dim_truncation,
    run_interp_convergence,
    sobol_points,
)
from .extended import RangeError
from .kernel import KernelSpec
from .lattice import cbc_construct, fooling_vector, write_genvec
from .pde import DiffusionModel, decay_sequence
from .weights import PdeWeightInput

__all__ = ["cli", "main"]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="latkern",
        description="Lattice-point kernel interpolation studies",
    )
    p.add_argument("--config", help="key=value file; flags override it")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--weights", choices=["product", "pod", "spod"])
    common.add_argument("--theta", type=float)
    common.add_argument("--c", type=float)
    common.add_argument("--p", type=float)
    common.add_argument("--delta", type=float)
    common.add_argument("--s", type=int)
    common.add_argument("--n-list", help="comma-separated point counts")
    common.add_argument("--mesh-level", type=int)
    common.add_argument("--L", type=int)
    common.add_argument("--genvec")
    common.add_argument("--out")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    sub.add_parser("cbc", parents=[common])
    sub.add_parser("interp-study", parents=[common])
    sub.add_parser("dimtrunc-study", parents=[common])
    sub.add_parser("selftest", parents=[common])
    return p


_CONFIG_KEYS = {
    "weights": str,
    "theta": float,
    "c": float,
    "p": float,
    "delta": float,
    "s": int,
    "n_list": str,
    "mesh_level": int,
    "L": int,
    "genvec": str,
    "out": str,
    "seed": int,
    "threads": int,
}


def _read_config(path: str) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, val = (t.strip() for t in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _CONFIG_KEYS[key](val)
    return out


def _build_config(kind: str, args: argparse.Namespace) -> StudyConfig:
    merged = {}
    if args.config:
        merged.update(_read_config(args.config))
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    kwargs = {"kind": kind}
    for key, val in merged.items():
        if key == "n_list":
            kwargs["n_schedule"] = tuple(int(t) for t in str(val).split(","))
        else:
            kwargs[key] = val
    return StudyConfig(**kwargs)


def _cmd_cbc(cfg: StudyConfig) -> int:
    model = DiffusionModel(cfg.c, cfg.theta, cfg.s)
    inp = PdeWeightInput(cfg.p, decay_sequence(model, cfg.s), cfg.delta)
    params = derive_for_family(cfg.weights, inp, cfg.s)
    spec = KernelSpec(params.alpha, params.scheme)
    n = cfg.n_schedule[-1]
    report = cbc_construct(spec, n, cfg.s)
    if cfg.out:
        write_genvec(cfg.out, report.z, n)
    else:
        sys.stdout.write(report.to_csv())
    return 0


def _cmd_selftest(cfg: StudyConfig) -> int:
    """Quick oracle-backed invariants; exits nonzero on any failure."""
    from .interpolant import build, evaluate
    from .lattice import Lattice, criterion_S
    from .special import zeta
    from .weights import WeightScheme

    checks: list[tuple[str, bool]] = []
    scheme = WeightScheme("product", gamma_j=np.ones(4))
    spec = KernelSpec(2, scheme)
    s1 = criterion_S(spec, Lattice(1, np.array([1])))
    want = (1.0 + 2.0 * zeta(2)) ** 2 - 1.0 - 2.0 * zeta(4)
    checks.append(("criterion identity n=1", abs(s1 - want) < 1e-10 * want))
    lat = cbc_construct(spec, 16, 3).lattice()
    rng = np.random.default_rng(7)
    vals = rng.standard_normal(16)
    itp = build(spec, lat, vals)
    node_err = max(
        abs(evaluate(itp, lat.points()[k]) - vals[k]) for k in range(16)
    )
    checks.append(("interpolation at nodes", node_err < 1e-8))
    h = fooling_vector(16, lat.z[:2])
    checks.append(("fooling congruence", int(h[:2] @ lat.z[:2]) % 16 == 0))
    sob = sobol_points(2, 3)
    checks.append(
        ("sobol start", np.allclose(sob[0], [0.5, 0.5], atol=1e-12))
    )
    ok = True
    for name, passed in checks:
        sys.stdout.write(f"{name}: {'ok' if passed else 'FAIL'}\n")
        ok &= passed
    return 0 if ok else 2


def cli(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    kind = {
        "cbc": "cbc-only",
        "interp-study": "interp-convergence",
        "dimtrunc-study": "dim-truncation",
        "selftest": "cbc-only",
    }[args.command]
    try:
        cfg = _build_config(kind, args)
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    try:
        if args.command == "cbc":
            return _cmd_cbc(cfg)
        if args.command == "selftest":
            return _cmd_selftest(cfg)
        run = (
            run_interp_convergence
            if args.command == "interp-study"
            else run_dim_truncation
        )
        rows, fit = run(cfg)
        if cfg.out is None:
            sys.stdout.write("".join(rows))
        if fit is not None:
            sys.stdout.write(f"# fitted slope {fit.slope!r}\n")
        return 0
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (RangeError, ArithmeticError, RuntimeError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 2


def main() -> None:
    sys.exit(cli(sys.argv[1:]))
