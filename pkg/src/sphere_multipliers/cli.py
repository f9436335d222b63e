"""Command-line interface for sphere-multipliers."""

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from . import analysis
from . import config as app_config
from . import emit
from .cache import get_cache_registry
from .errors import (
    ConfigError,
    DimensionOverflowError,
    DomainError,
    FitError,
    NumericError,
    PositivityError,
    ShapeError,
)
from .harmonics import random_coefficients
from .kernels import (
    Kernel,
    ZonalKernel,
    leading_eigenvalues,
    make_kernel,
    make_zonal,
    power_law_zonal,
    random_kernel,
    read_kernel_file,
    reproducing_check,
)
from .multipliers import FAMILY_NAMES, MultiplierFamily, log_spaced, make_family
from .quadrature import sphere_grid
from .reports import CheckReport, atomic_write_text, combine_reports, format_csv, format_json
from .specialfns import cumulative_dim, set_degree_limit
from .version import __version__

log = logging.getLogger("sphere-multipliers.cli")

LOG_FORMAT = "%(asctime)s [%(name)s] %(levelname)s: %(message)s"

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

USAGE_ERRORS = (ConfigError, DomainError, ShapeError, PositivityError, DimensionOverflowError)
RUN_ERRORS = (FitError, NumericError)
MULTIPLIER_COLUMNS = ["k", "t", "eta", "one_minus_eta", "min1kt_pow_s"]


@dataclass
class RunContext:
    """Resolved configuration plus the objects every command needs."""
    config: dict
    config_path: Optional[Path]
    seed: int

    @property
    def tolerances(self) -> dict:
        return self.config["tolerances"]

    @property
    def verify(self) -> dict:
        return self.config["verify"]

    def map(self, fn: Callable, items: Iterable) -> list:
        """Apply fn to every item; results keep submission order for any worker count."""
        items = list(items)
        workers = int(self.config.get("workers", 1))
        if workers <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))

    def family(self) -> MultiplierFamily:
        section = self.config["family"]
        table = None
        if section["name"] == "custom" and section.get("table"):
            table = {(int(k), float(t)): float(eta) for k, t, eta in section["table"]}
        return make_family(section["name"], section["m"], l=section["l"], table=table, s=section.get("s"))

    def kernel(self) -> Kernel:
        section = self.config["kernel"]
        m = section.get("m") or self.config["family"]["m"]
        kind = section["kind"]
        if kind == "power_law":
            return power_law_zonal(m, section["k_max"], section["gamma"])
        if kind == "random":
            seed = section["seed"] if section.get("seed") is not None else self.seed
            return random_kernel(m, section["k_max"], seed, section["gamma"])
        if kind == "file":
            return read_kernel_file(section["path"])
        if spec.get("a") is not None:
            return make_zonal(m, spec["a"])
        return make_kernel(m, spec["blocks"])

    def t_lattice(self) -> np.ndarray:
        lattice = self.config["lattice"]
        return log_spaced(lattice["t_min"], lattice["t_max"], lattice["t_count"])

    def fit_grid(self) -> np.ndarray:
        fit = self.config["fit"]
        return log_spaced(fit["t_min"], fit["t_max"], fit["t_count"])

    def k_range(self, k_min: int = 0) -> range:
        lattice = self.config["lattice"]
        return range(max(k_min, lattice["k_min"]), lattice["k_max"] + 1)

    def equivalence_exponent(self, family: MultiplierFamily) -> Optional[float]:
        """family.s from the config, else the exponent the family declares."""
        s = self.config["family"].get("s")
        return float(s) if s is not None else family.declared_s

    def window(self) -> Optional[tuple[int, int]]:
        window = self.verify.get("window")
        return tuple(window) if window else None

    def functions(self) -> list:
        spec = self.config["functions"]
        seed = spec["seed"] if spec.get("seed") is not None else self.seed
        streams = np.random.SeedSequence(seed).spawn(spec["count"])
        return [random_coefficients(2, spec["k_max"], np.random.default_rng(s)) for s in streams]


# ─────────────────────────────────────────────────────────────
# Verifier registry
# ─────────────────────────────────────────────────────────────

def _function_campaign(ctx: RunContext, check: Callable[[Any, float], CheckReport]) -> list[CheckReport]:
    pairs = [(f, t) for f in ctx.functions() for t in ctx.verify["t_values"]]
    return ctx.map(lambda pair: check(*pair), pairs)


def _verify_parseval(ctx: RunContext) -> CheckReport:
    family, tol = ctx.family(), ctx.tolerances["parseval"]
    reports = _function_campaign(
        ctx, lambda f, t: analysis.parseval_equality_check(f, family, t, tol=tol)
    )
    return combine_reports("parseval", reports, worst="max")


def _verify_hy(ctx: RunContext) -> CheckReport:
    family = ctx.family()
    factor = ctx.config["quadrature"]["lp_grid_factor"]
    reports = []
    for p in ctx.verify["p_values"]:
        if p == 1:
            tol = ctx.tolerances["l1sup"]
            reports += _function_campaign(
                ctx, lambda f, t: analysis.l1_sup_check(f, family, t, lp_grid_factor=factor, tol=tol)
            )
        else:
            tol = ctx.tolerances["hy"]
            reports += _function_campaign(
                ctx,
                lambda f, t, p=p: analysis.hausdorff_young_check(
                    f, family, t, p, lp_grid_factor=factor, tol=tol
                ),
            )
    return combine_reports("hy", reports, worst="min")


def _verify_l1sup(ctx: RunContext) -> CheckReport:
    family = ctx.family()
    factor = ctx.config["quadrature"]["lp_grid_factor"]
    tol = ctx.tolerances["l1sup"]
    reports = _function_campaign(
        ctx, lambda f, t: analysis.l1_sup_check(f, family, t, lp_grid_factor=factor, tol=tol)
    )
    return combine_reports("l1sup", reports, worst="min")


def _verify_kernel_identity(ctx: RunContext) -> CheckReport:
    kern, family = ctx.kernel(), ctx.family()
    key = "kernel_identity_zonal" if kern.zonal else "kernel_identity"
    tol = ctx.tolerances[key]
    n_quad = max(ctx.config["quadrature"]["n_profile"], kern.K_max + 1)
    reports = ctx.map(
        lambda t: analysis.kernel_identity_check(kern, family, t, n_quad=n_quad, tol=tol),
        ctx.verify["t_values"],
    )
    return combine_reports("kernel-identity", reports, worst="max")


def _require_zonal(kern: Kernel, check: str) -> ZonalKernel:
    if not isinstance(kern, ZonalKernel):
        raise ShapeError(f"'{check}' needs a zonal kernel (kernel.kind power_law, or inline a)")
    return kern


def _verify_sqrt_identity(ctx: RunContext) -> CheckReport:
    kern, family = _require_zonal(ctx.kernel(), "sqrt-identity"), ctx.family()
    tol = ctx.tolerances["sqrt_identity"]
    reports = ctx.map(
        lambda t: analysis.sqrt_deviation_identity_check(kern, family, t, tol=tol),
        ctx.verify["t_values"],
    )
    return combine_reports("sqrt-identity", reports, worst="max")


def _verify_deviation_sum(ctx: RunContext) -> CheckReport:
    return analysis.deviation_sum_check(
        ctx.kernel(), ctx.family(), ctx.fit_grid(), ctx.verify["beta"],
        max_growth=ctx.tolerances["deviation_sum_growth"],
    )


def _verify_decay(ctx: RunContext) -> CheckReport:
    kern = ctx.kernel()
    total = cumulative_dim(kern.K_max, kern.m)
    window = ctx.window()
    seq = leading_eigenvalues(kern, min(window[1], total) if window else total)
    report = analysis.decay_check(
        seq, ctx.verify["beta"], kern.m, window, ctx.tolerances["decay_growth"]
    )
    return report.to_check_report()


def _verify_tail_mass(ctx: RunContext) -> CheckReport:
    return analysis.tail_mass_check(
        ctx.kernel(), ctx.verify["beta"], max_growth=ctx.tolerances["tail_mass_growth"]
    )


def _verify_block_closing(ctx: RunContext) -> CheckReport:
    return analysis.block_closing_check(ctx.kernel())


def _verify_pipeline(ctx: RunContext) -> CheckReport:
    lattice = ctx.config["lattice"]
    return analysis.end_to_end_pipeline(
        ctx.kernel(), ctx.family(), ctx.fit_grid(),
        window=ctx.window(),
        hypothesis=ctx.verify["hypothesis"],
        s=ctx.config["family"].get("s"),
        K=lattice["half_bounded_k"],
        N=lattice["half_bounded_n"],
        k_range=ctx.k_range(k_min=1),
        t_range=log_spaced(lattice["t_min"], min(lattice["t_max"], math.pi / 2), lattice["t_count"]),
        band_limit_factor=ctx.config["fit"]["band_limit_factor"],
        max_growth=ctx.tolerances["decay_growth"],
        ratio_limit=ctx.tolerances["equivalence_ratio"],
    )


def _verify_reproducing(ctx: RunContext) -> CheckReport:
    kern = _require_zonal(ctx.kernel(), "reproducing")
    grid = sphere_grid(kern.K_max) if kern.m == 2 else None
    residual = reproducing_check(
        kern, grid=grid, n_pairs=ctx.verify["n_pairs"], seed=ctx.seed,
        n_quad=max(ctx.config["quadrature"]["n_profile"], kern.K_max + 1),
    )
    tol = ctx.tolerances["reproducing"]
    return CheckReport(
        check="reproducing",
        inputs={"m": kern.m, "K_max": kern.K_max, "path": "grid" if grid else "funk-hecke"},
        lhs=None, rhs=None, value=residual, passed=residual <= tol,
        tolerances={"residual": tol},
    )


def _verify_equivalence(ctx: RunContext) -> CheckReport:
    family = ctx.family()
    s = ctx.equivalence_exponent(family)
    if s is None:
        raise DomainError(f"family '{family.name}' declares no equivalence exponent; set family.s")
    lattice = ctx.config["lattice"]
    t_range = log_spaced(lattice["t_min"], min(lattice["t_max"], math.pi / 2), lattice["t_count"])
    return analysis.equivalence_check(
        family, s, ctx.k_range(k_min=1), t_range, ctx.tolerances["equivalence_ratio"]
    )


def _verify_half_bounded(ctx: RunContext) -> CheckReport:
    lattice = ctx.config["lattice"]
    return analysis.half_bounded_check(
        ctx.family(), lattice["half_bounded_k"], lattice["half_bounded_n"],
        decay_ks=lattice["decay_ks"],
        decay_ratio=ctx.tolerances["half_bounded_decay_ratio"],
    )


def _verify_cap_bracket(ctx: RunContext) -> CheckReport:
    return analysis.cap_bracket_check(
        [ctx.config["family"]["m"]], ctx.t_lattice(),
        n_quad=ctx.config["quadrature"]["n_profile"],
        slack=ctx.tolerances["cap_bracket"],
    )


def _verify_holder_sup(ctx: RunContext) -> CheckReport:
    kern = _require_zonal(ctx.kernel(), "holder-sup")
    return analysis.holder_conditions_check(
        kern, ctx.family(), ctx.verify["t_values"],
        n_u=ctx.verify["n_u"], tol=ctx.tolerances["holder_sup"],
    )


def _verify_uniform_bound(ctx: RunContext) -> CheckReport:
    return analysis.uniform_bound_check(
        ctx.family(), ctx.k_range(), ctx.t_lattice(), tol=ctx.tolerances["uniform_bound"]
    )


CHECKS: dict[str, Callable[[RunContext], CheckReport]] = {
    "parseval": _verify_parseval,
    "hy": _verify_hy,
    "l1sup": _verify_l1sup,
    "kernel-identity": _verify_kernel_identity,
    "sqrt-identity": _verify_sqrt_identity,
    "deviation-sum": _verify_deviation_sum,
    "decay": _verify_decay,
    "tail-mass": _verify_tail_mass,
    "block-closing": _verify_block_closing,
    "pipeline": _verify_pipeline,
    "reproducing": _verify_reproducing,
    "equivalence": _verify_equivalence,
    "half-bounded": _verify_half_bounded,
    "cap-bracket": _verify_cap_bracket,
    "holder-sup": _verify_holder_sup,
    "uniform-bound": _verify_uniform_bound,
}

# older names for two of the checks
CHECK_ALIASES = {"lemma23": "sqrt-identity", "keyabst": "deviation-sum"}
CHECKS.update({alias: CHECKS[name] for alias, name in CHECK_ALIASES.items()})


# ─────────────────────────────────────────────────────────────
# Output
# ─────────────────────────────────────────────────────────────

def _columns(rows: Sequence[dict]) -> list[str]:
    columns: list[str] = []
    for row in rows:
        columns += [key for key in row if key not in columns]
    return columns


def _deliver(args: argparse.Namespace, name: str, text: str, fmt: str, rows: int = 0) -> None:
    """Write an artifact to --out DIR (atomically) or to stdout."""
    if not args.out:
        sys.stdout.write(text)
        return
    path = atomic_write_text(Path(args.out).expanduser() / f"{name}.{fmt}", text)
    log.info(f"wrote {path}")
    emit.emit("artifact.written", {"path": str(path), "format": fmt, "rows": rows})


def cmd_multipliers(ctx: RunContext, args: argparse.Namespace) -> int:
    family = ctx.family()
    ks = list(ctx.k_range())
    if not ks:
        raise DomainError("k range is empty")
    K = ks[-1]
    s = ctx.equivalence_exponent(family)

    def column(t: float) -> list[dict]:
        sequence = family.sequence(K, t)
        return [
            {
                "k": k,
                "t": float(t),
                "eta": float(sequence[k]),
                "one_minus_eta": 1.0 - float(sequence[k]),
                "min1kt_pow_s": min(1.0, k * float(t)) ** s if s is not None else None,
            }
            for k in ks
        ]

    rows = [row for chunk in ctx.map(column, ctx.t_lattice()) for row in chunk]
    if args.format == "json":
        text = format_json({"family": family.describe(), "s": s, "seed": ctx.seed, "rows": rows})
    else:
        text = format_csv(rows, MULTIPLIER_COLUMNS)
    _deliver(args, "multipliers", text, args.format, len(rows))
    return EXIT_OK


def cmd_verify(ctx: RunContext, args: argparse.Namespace) -> int:
    report = CHECKS[args.check](ctx)
    record = report.to_record(include_trace=True)
    record["seed"] = ctx.seed
    if args.format == "csv":
        text = format_csv(report.trace, _columns(report.trace))
    else:
        text = format_json(record)
    _deliver(args, f"verify-{args.check}", text, args.format, len(report.trace))
    emit.emit("check.completed", {
        "check": report.check, "pass": report.passed, "residual_or_margin": record["residual_or_margin"],
    })
    if not report.passed:
        log.warning(f"check '{args.check}' failed: {record['residual_or_margin']}")
        return EXIT_FAILED
    return EXIT_OK


def cmd_fit_holder(ctx: RunContext, args: argparse.Namespace) -> int:
    kern, family = ctx.kernel(), ctx.family()
    band_limit_factor = ctx.config["fit"]["band_limit_factor"]
    header = {"family": family.describe(), "kernel": {"m": kern.m, "K_max": kern.K_max}, "seed": ctx.seed}
    try:
        fit = analysis.holder_exponent_fit(kern, family, ctx.fit_grid(), band_limit_factor)
    except FitError as exc:
        record = {**header, "error": str(exc), "usable": exc.usable, "excluded": exc.excluded}
        _deliver(args, "fit-holder", format_json(record), "json")
        raise

    record = {**header, **fit.to_record()}
    used = {t for t, _ in fit.points}
    rows = sorted(
        [{"t": t, "g": g, "used": True} for t, g in fit.points]
        + [{"t": row["t"], "g": row["g"], "used": False} for row in fit.excluded if row["t"] not in used],
        key=lambda row: row["t"],
    )
    if args.out:
        _deliver(args, "fit-holder", format_json(record), "json")
        _deliver(args, "fit-holder", format_csv(rows, ["t", "g", "used"]), "csv", len(rows))
    elif args.format == "csv":
        _deliver(args, "fit-holder", format_csv(rows, ["t", "g", "used"]), "csv", len(rows))
    else:
        _deliver(args, "fit-holder", format_json(record), "json")
    return EXIT_OK


def cmd_eigen(ctx: RunContext, args: argparse.Namespace) -> int:
    kern = ctx.kernel()
    total = cumulative_dim(kern.K_max, kern.m)
    window = ctx.window()
    seq = leading_eigenvalues(kern, min(window[1], total) if window else total)
    rows = seq.rows()
    if args.format == "json":
        text = format_json({"m": kern.m, "K_max": kern.K_max, "seed": ctx.seed, "rows": rows})
    else:
        text = format_csv(rows, ["n", "lambda", "k", "j"])
    _deliver(args, "eigen", text, args.format, len(rows))
    return EXIT_OK


def cmd_print_config(ctx: RunContext, args: argparse.Namespace) -> int:
    if args.write:
        path = app_config.write_config(ctx.config, ctx.config_path)
        log.info(f"Configuration written to {path}")
        return EXIT_OK
    sys.stdout.write(format_json(ctx.config))
    return EXIT_OK


COMMANDS = {
    "multipliers": cmd_multipliers,
    "verify": cmd_verify,
    "fit-holder": cmd_fit_holder,
    "eigen": cmd_eigen,
    "print-config": cmd_print_config,
}


# ─────────────────────────────────────────────────────────────
# Argument parsing
# ─────────────────────────────────────────────────────────────

def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS,
                        help="Path to config file (YAML, JSON or TOML)")
    common.add_argument("--out", metavar="DIR", nargs="?", const=True,
                        help="Write artifacts to DIR (bare --out: the output_dir setting) instead of stdout")
    common.add_argument("--seed", type=int, metavar="N", help="Random seed")
    common.add_argument("--family", choices=FAMILY_NAMES, metavar="NAME",
                        help=f"Multiplier family ({', '.join(FAMILY_NAMES)})")
    common.add_argument("--m", type=int, metavar="M", help="Sphere dimension")
    common.add_argument("--l", type=int, metavar="L", help="Combination order for the combo family")
    common.add_argument("--kmax", type=int, metavar="K", help="Band limit")
    common.add_argument("--format", choices=("csv", "json"), default=None, help="Artifact format")
    return common


def create_argument_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphere-multipliers",
        description="Multiplier operators, kernels and eigenvalue decay on S^m",
    )

    parser.add_argument(
        "--version",
        action="version",
        version=f"sphere-multipliers {__version__}",
    )
    parser.add_argument(
        "--config",
        metavar="PATH",
        help="Path to config file (default: platform config dir)",
    )
    parser.add_argument(
        "--print-defaults",
        action="store_true",
        help="Print default configuration as JSON and exit",
    )
    parser.add_argument(
        "--print-config-schema",
        action="store_true",
        help="Print configuration schema as JSON and exit",
    )
    parser.add_argument(
        "--validate-config",
        action="store_true",
        help="Validate configuration file and exit",
    )
    parser.add_argument(
        "--print-event-catalog",
        action="store_true",
        help="Print event catalog as JSON and exit",
    )

    common = _common_options()
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.add_parser("multipliers", parents=[common], help="Tabulate eta_k^t over the lattice")
    verify = sub.add_parser("verify", parents=[common], help="Run one verifier")
    verify.add_argument("check", choices=sorted(CHECKS), metavar="CHECK",
                        help=f"One of: {', '.join(sorted(CHECKS))}")
    sub.add_parser("fit-holder", parents=[common], help="Fit the integrated Hölder exponent")
    sub.add_parser("eigen", parents=[common], help="Decreasing rearrangement of the kernel eigenvalues")
    print_config = sub.add_parser("print-config", parents=[common], help="Print the resolved configuration")
    print_config.add_argument("--write", action="store_true",
                              help="Save the resolved configuration as YAML to the config path instead")
    return parser


def _emit_json(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _handle_introspection(args: argparse.Namespace) -> Optional[int]:
    config_path = Path(args.config).expanduser() if args.config else None

    if args.print_defaults:
        _emit_json(app_config.config_defaults())
        return EXIT_OK

    if args.print_config_schema:
        _emit_json(app_config.config_schema())
        return EXIT_OK

    if args.validate_config:
        errors = app_config.validate_config_file(config_path)
        if errors:
            for error in errors:
                print(error, file=sys.stderr)
            return EXIT_USAGE
        return EXIT_OK

    if args.print_event_catalog:
        _emit_json({"catalog": emit.EVENT_CATALOG})
        return EXIT_OK

    return None


def _overrides(args: argparse.Namespace) -> dict:
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    family = {}
    if args.family is not None:
        family["name"] = args.family
    if args.m is not None:
        family["m"] = args.m
    if args.l is not None:
        family["l"] = args.l
    if family:
        overrides["family"] = family
    if args.kmax is not None:
        overrides["kernel"] = {"k_max": args.kmax}
        overrides["functions"] = {"k_max": args.kmax}
        overrides["lattice"] = {"k_max": args.kmax}
    return overrides


def _configure_logging(level: str) -> None:
    logging.basicConfig(format=LOG_FORMAT, level=getattr(logging, level, logging.INFO), stream=sys.stderr)


def _failed(command: str, exc: Exception, code: int) -> int:
    log.error(f"{command}: {exc}")
    emit.emit("run.failed", {
        "command": command,
        "error_type": type(exc).__name__,
        "message": str(exc),
        "exit_code": code,
    })
    return code


def main(args: Optional[list[str]] = None) -> int:
    parser = create_argument_parser()
    try:
        parsed_args = parser.parse_args(args)
    except SystemExit as exc:
        return int(exc.code or 0)

    result = _handle_introspection(parsed_args)
    if result is not None:
        return result
    if parsed_args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if parsed_args.format is None:
        parsed_args.format = "json" if parsed_args.command in ("verify", "fit-holder") else "csv"

    config_path = Path(parsed_args.config).expanduser() if parsed_args.config else None
    try:
        config = app_config.load_config(config_path, overrides=_overrides(parsed_args), strict=True)
    except ConfigError as exc:
        _configure_logging("INFO")
        log.error(str(exc))
        for error in exc.errors:
            print(error, file=sys.stderr)
        return EXIT_USAGE

    if parsed_args.out is True:
        parsed_args.out = config["output_dir"]
    _configure_logging(config["log_level"])
    emit.configure("sphere-multipliers", enabled=config["events"])
    set_degree_limit(config["quadrature"]["k_limit"])
    ctx = RunContext(config=config, config_path=config_path, seed=config["seed"])
    emit.emit("config.resolved", {
        "config_path": str(config_path) if config_path else None,
        "command": parsed_args.command,
        "seed": ctx.seed,
        "workers": config["workers"],
    })

    try:
        return COMMANDS[parsed_args.command](ctx, parsed_args)
    except USAGE_ERRORS as exc:
        return _failed(parsed_args.command, exc, EXIT_USAGE)
    except RUN_ERRORS as exc:
        return _failed(parsed_args.command, exc, EXIT_FAILED)
    finally:
        log.debug(f"cache tables: {get_cache_registry().stats()}")


if __name__ == "__main__":
    sys.exit(main())
