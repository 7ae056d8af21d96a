"""Command-line front end.

Subcommands: simulate, estimate, limit-dist, consistency, bounds, gdelta.
Values come from ``--config`` (``key = value`` lines, ``#`` comments, keys
named like the flags) and are overridden by flags given on the command line.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import harness
from .errors import DomainError, L1DriftError
from .estimator import g_delta, minimize_l1
from .kernels import TimeGrid, parse_kernel
from .model import ModelParams, simulate_X_euler, simulate_X_exact
from .sampler import SeedSpec, sample_path, write_path_csv

log = logging.getLogger("l1drift")

# key -> (type, help)
OPTIONS = {
    "kernel": (str, "driver kernel, e.g. fbm:H=0.7, subfbm:H=0.6, bifbm:H=0.7,K=0.8, bm, tabulated:<csv>"),
    "theta0": (float, "true drift"),
    "x0": (float, "initial value (nonzero)"),
    "eps": (float, "noise level"),
    "eps-list": (str, "comma-separated noise levels"),
    "n": (int, "number of grid steps"),
    "T": (float, "horizon"),
    "theta-lo": (float, "lower end of the drift search interval"),
    "theta-hi": (float, "upper end of the drift search interval"),
    "delta": (float, "separation for the exceedance event"),
    "replicates": (int, "Monte Carlo replicates"),
    "seed": (int, "root seed"),
    "out": (str, "output directory"),
    "threads": (int, "worker threads (results do not depend on it)"),
    "scan-points": (int, "coarse scan size of the optimizer"),
    "scheme": (str, "simulation scheme for simulate: exact or euler"),
}

DEFAULTS = {"T": 1.0, "seed": 0, "threads": 1, "scan-points": 200, "scheme": "exact"}

REQUIRED = {
    "simulate": ("kernel", "theta0", "x0", "eps", "n"),
    "estimate": ("kernel", "theta0", "x0", "eps", "n", "theta-lo", "theta-hi"),
    "limit-dist": ("kernel", "theta0", "x0", "n", "theta-lo", "theta-hi", "replicates"),
    "consistency": ("kernel", "theta0", "x0", "eps-list", "n", "theta-lo", "theta-hi", "delta", "replicates"),
    "bounds": ("kernel", "n", "replicates"),
    "gdelta": ("theta0", "x0", "delta"),
}

SUBCOMMAND_DEFAULTS = {
    "limit-dist": {"eps": 0.01},
    "bounds": {"theta0": 1.0, "x0": 1.0, "eps": 0.1},
}


class UsageError(Exception):
    pass


def _dest(key: str) -> str:
    return key.replace("-", "_")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="plain-text key = value config file")
    common.add_argument("-v", "--verbose", action="store_true")
    for key, (typ, help_) in OPTIONS.items():
        common.add_argument(f"--{key}", dest=_dest(key), type=typ, default=None, help=help_)
    parser = argparse.ArgumentParser(prog="l1drift", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in REQUIRED:
        sub.add_parser(name, parents=[common])
    return parser


def read_config(path) -> dict:
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        key = key.strip().replace("_", "-")
        if not eq:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        if key.lower() == "t":
            key = "T"
        if key not in OPTIONS:
            raise UsageError(f"{path}:{lineno}: unknown key '{key}'")
        typ = OPTIONS[key][0]
        try:
            values[key] = typ(value.strip())
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value for '{key}': {value.strip()!r}") from None
    return values


def resolve(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    cfg.update(SUBCOMMAND_DEFAULTS.get(args.command, {}))
    if args.config:
        cfg.update(read_config(args.config))
    for key in OPTIONS:
        v = getattr(args, _dest(key))
        if v is not None:
            cfg[key] = v
    missing = [k for k in REQUIRED[args.command] if k not in cfg]
    if missing:
        raise UsageError(f"{args.command}: missing required key(s): {', '.join(missing)}")
    return cfg


def _kernel(cfg):
    try:
        return parse_kernel(cfg["kernel"])
    except DomainError as exc:
        raise UsageError(f"bad kernel spec: {exc}") from None


def _eps_list(cfg):
    try:
        return tuple(float(x) for x in cfg["eps-list"].split(",") if x.strip())
    except ValueError:
        raise UsageError(f"bad eps-list {cfg['eps-list']!r}") from None


def _params(cfg, eps=None):
    theta0 = cfg["theta0"]
    return ModelParams(
        theta0, cfg["x0"], cfg.get("eps", 0.0) if eps is None else eps,
        cfg.get("theta-lo", theta0), cfg.get("theta-hi", theta0), cfg["T"],
    )


def _g7(x: float) -> str:
    return format(x, "#.7g")


def _print_config(command: str, cfg: dict) -> None:
    shown = {k: cfg[k] for k in OPTIONS if k in cfg}
    print(f"# {command} config: {json.dumps(shown, sort_keys=True)}")


def cmd_gdelta(cfg):
    print(f"g_delta = {_g7(g_delta(cfg['theta0'], cfg['x0'], cfg['delta'], cfg['T']))}")


def cmd_simulate(cfg):
    k = _kernel(cfg)
    grid = TimeGrid(cfg["T"], cfg["n"])
    p = _params(cfg)
    G = sample_path(k, grid, SeedSpec(cfg["seed"], 0))
    if cfg["scheme"] == "exact":
        X = simulate_X_exact(p, G)
    elif cfg["scheme"] == "euler":
        X = simulate_X_euler(p, G)
    else:
        raise UsageError(f"unknown scheme {cfg['scheme']!r}")
    if "out" in cfg:
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        # the output location and thread count do not affect the bytes written
        header = harness.config_header({k: cfg[k] for k in OPTIONS if k in cfg and k not in ("threads", "out")})
        write_path_csv(out / "path.csv", X, column="X", header=header)
        write_path_csv(out / "driver.csv", G, column="value", header=header)
        print(f"wrote {out / 'path.csv'} and {out / 'driver.csv'}")
    else:
        print("t,X")
        for t, v in zip(X.t, X.values):
            print(f"{t:.17g},{v:.17g}")


def cmd_estimate(cfg):
    k = _kernel(cfg)
    grid = TimeGrid(cfg["T"], cfg["n"])
    p = _params(cfg)
    G = sample_path(k, grid, SeedSpec(cfg["seed"], 0))
    res = minimize_l1(simulate_X_exact(p, G), p, scan_points=cfg["scan-points"])
    print(f"theta_hat = {_g7(res.theta_hat)}")
    print(f"objective = {_g7(res.objective)}")
    print(f"evaluations = {res.n_evals}")


def _experiment(cfg, tag):
    k = _kernel(cfg)
    grid = TimeGrid(cfg["T"], cfg["n"])
    if tag == harness.CONSISTENCY:
        eps_list = _eps_list(cfg)
        p = _params(cfg, eps=eps_list[0] if eps_list else 0.0)
    else:
        eps_list = (cfg["eps"],)
        p = _params(cfg)
    ec = harness.ExperimentConfig(
        kernel=k, params=p, grid=grid, experiment=tag, eps_list=eps_list,
        delta=cfg.get("delta"), replicates=cfg["replicates"], root_seed=cfg["seed"],
        scan_points=cfg["scan-points"], threads=cfg["threads"],
    )
    report = harness.run(ec)
    if "out" in cfg:
        for path in report.write(cfg["out"]):
            print(f"wrote {path}")
    return report


def cmd_consistency(cfg):
    r = _experiment(cfg, harness.CONSISTENCY).results
    print("eps,frequency,se,bound")
    for row in r["per_eps"]:
        print(",".join(_g7(row[c]) for c in ("eps", "frequency", "se", "bound")))
    for name, ok in r["checks"].items():
        print(f"{name}: {'PASS' if ok else 'FAIL'}")


def cmd_limit_dist(cfg):
    r = _experiment(cfg, harness.LIMIT_DIST).results
    print(f"ks = {_g7(r['ks'])}")
    print(f"coupled_median_gap = {_g7(r['coupled_median_gap'])}")
    print(f"boundary_fraction = {_g7(r['boundary_fraction'])}")
    if r["boundary_warning"]:
        print("warning: estimator pinned at the search boundary too often")


def cmd_bounds(cfg):
    r = _experiment(cfg, harness.BOUNDS).results
    print(f"m_hat = {_g7(r['m_hat'])} (se {_g7(r['se'])}), sigma2 = {_g7(r['sigma2'])}")
    if r["sandwich_lo"] is not None:
        print(f"sandwich = [{_g7(r['sandwich_lo'])}, {_g7(r['sandwich_hi'])}]")
    for tc in r["tail_checks"]:
        print(f"tail x={_g7(tc['x'])}: empirical {_g7(tc['empirical'])} bound {_g7(tc['bound'])}"
              f" {'PASS' if tc['pass'] else 'FAIL'}")
    for name, ok in r["checks"].items():
        print(f"{name}: {'n/a' if ok is None else 'PASS' if ok else 'FAIL'}")


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "limit-dist": cmd_limit_dist,
    "consistency": cmd_consistency,
    "bounds": cmd_bounds,
    "gdelta": cmd_gdelta,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve(args)
        _print_config(args.command, cfg)
        COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"l1drift {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (L1DriftError, ValueError, OSError) as exc:
        print(f"l1drift {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
