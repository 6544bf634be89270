"""
htcsim command line.

Subcommands:
    mac-bench   RMSE/SDE of random K-term dot products per design
    mul-sweep   exhaustive multiplier error table
    fir         6-tap Gaussian blur of a PGM image
    dct         8x8 block DCT/IDCT round trip of a PGM image
    activity    switching activity of random MAC evaluations

CSV goes to --output (or --metrics for the image commands) or stdout;
diagnostics and the summary table go to stderr. Every CSV row starts with a
schema column "<command>/1".
"""

import argparse
import csv
import io
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from htcsim import __version__
from htcsim.apps import dct_roundtrip, fir_run
from htcsim.config import RunConfig, read_config_values
from htcsim.errors import ConfigurationError, HtcSimError
from htcsim.htc_arith import WireKind
from htcsim.logging_config import get_logger, setup_logging
from htcsim.metrics import activity_bench, mac_error_bench, mul_sweep_table
from htcsim.pgm import pgm_read, pgm_write

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_DATA = 1
EXIT_CONFIG = 2

Rows = list[dict[str, object]]


def _int_auto(text: str) -> int:
    """Integer in any base Python accepts (0x5A, 0b101, 90)."""
    return int(text, 0)


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part, 0) for part in text.split(",") if part.strip())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _designs(cfg: RunConfig) -> list[str]:
    """A comma separated design list; "all" expands to htc, cbsc, unary."""
    names = [n.strip() for n in cfg.design.split(",") if n.strip()]
    if names == ["all"]:
        return ["htc", "cbsc", "unary"]
    return names


def _fmt(value: float, digits: int = 6) -> str:
    if math.isinf(value):
        return "inf"
    return f"{value:.{digits}f}"


def _fraction_text(value: Fraction, bits: int) -> str:
    """Fraction over 2^N when it fits, else over 2^(2N)."""
    for den in (1 << bits, 1 << (2 * bits)):
        num = value * den
        if num.denominator == 1:
            return f"{num.numerator}/{den}"
    return str(value)


def cmd_mac_bench(cfg: RunConfig) -> Rows:
    rows: Rows = []
    for name in _designs(cfg):
        stats = mac_error_bench(
            name,
            bits=cfg.bits,
            fan_in=cfg.fanin,
            trials=cfg.trials,
            seed=cfg.seed,
            polarity=cfg.polarity,
            options=cfg.design_options(),
            normalization=cfg.normalization,
            distribution=cfg.vectors,
            workers=cfg.threads,
        )
        rows.append(
            {
                "schema": "mac-bench/1",
                "design": name,
                "bits": cfg.bits,
                "fanin": cfg.fanin,
                "polarity": cfg.polarity.value,
                "trials": stats.trials,
                "normalization": cfg.normalization.value,
                "rmse_pct": _fmt(stats.rmse_pct),
                "sde_pct": _fmt(stats.sde_pct),
                "max_abs_err": _fmt(stats.max_abs_err, 8),
                "mean_err": _fmt(stats.mean_err, 8),
            },
        )
    return rows


def cmd_mul_sweep(cfg: RunConfig) -> Rows:
    # no design column: equivalent designs give byte-identical tables
    table = mul_sweep_table(cfg.design, cfg.bits, cfg.polarity)
    return [
        {
            "schema": "mul-sweep/1",
            "bits": cfg.bits,
            "polarity": cfg.polarity.value,
            "a": row.a,
            "b": row.b,
            "product": _fraction_text(row.product, cfg.bits),
            "exact": _fraction_text(row.exact, cfg.bits),
            "error": _fmt(float(row.error), 8),
        }
        for row in table
    ]


def _require_input(cfg: RunConfig) -> Path:
    if cfg.input is None:
        raise ConfigurationError("this command needs --input PATH")
    return cfg.input


def cmd_fir(cfg: RunConfig) -> Rows:
    image = pgm_read(_require_input(cfg))
    result = fir_run(image, cfg.fir_spec(), cfg.reference, cfg.design_options(), cfg.threads)
    if cfg.output is not None:
        pgm_write(result.image, cfg.output)
    return [
        {
            "schema": "fir/1",
            "design": cfg.design,
            "mode": cfg.mode.value,
            "reference": cfg.reference.value,
            "width": image.width,
            "height": image.height,
            "psnr_db": _fmt(result.psnr_db, 4),
            "rmse": _fmt(result.rmse),
            "latency_cycles": result.latency_cycles,
        },
    ]


def cmd_dct(cfg: RunConfig) -> Rows:
    image = pgm_read(_require_input(cfg))
    result = dct_roundtrip(image, cfg.dct_spec(), cfg.design_options(), cfg.threads)
    if cfg.output is not None:
        pgm_write(result.image, cfg.output)
    return [
        {
            "schema": "dct/1",
            "design": cfg.design,
            "width": image.width,
            "height": image.height,
            "psnr_db": _fmt(result.psnr_db, 4),
            "rmse": _fmt(result.rmse),
            "saturated": result.saturated,
            "latency_cycles": result.latency_cycles,
        },
    ]


def cmd_activity(cfg: RunConfig) -> Rows:
    rows: Rows = []
    for name in _designs(cfg):
        report = activity_bench(
            name,
            bits=cfg.bits,
            fan_in=cfg.fanin,
            evaluations=cfg.evaluations,
            seed=cfg.seed,
            polarity=cfg.polarity,
            options=cfg.design_options(),
        )
        for kind in WireKind:
            wires = [w for w, k in report.kinds.items() if k == kind]
            if not wires:
                continue
            counts = [report.wires[w] for w in wires]
            rows.append(
                {
                    "schema": "activity/1",
                    "design": name,
                    "bits": cfg.bits,
                    "fanin": cfg.fanin,
                    "evaluations": report.evaluations,
                    "kind": kind.value,
                    "wires": len(wires),
                    "transitions": sum(counts),
                    "per_wire_epoch": _fmt(sum(counts) / (len(wires) * report.evaluations), 4),
                    "max_wire_epoch": _fmt(max(counts) / report.evaluations, 4),
                },
            )
    return rows


COMMANDS: dict[str, tuple[Callable[[RunConfig], Rows], str]] = {
    "mac-bench": (cmd_mac_bench, "RMSE/SDE of random dot products"),
    "mul-sweep": (cmd_mul_sweep, "exhaustive multiplier error table"),
    "fir": (cmd_fir, "6-tap Gaussian FIR blur of a PGM image"),
    "dct": (cmd_dct, "8x8 block DCT/IDCT round trip of a PGM image"),
    "activity": (cmd_activity, "switching activity of random MAC evaluations"),
}

# commands whose CSV goes to --metrics; their --output is the image
_METRICS_COMMANDS = {"fir", "dct"}


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    log = common.add_mutually_exclusive_group()
    log.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    log.add_argument("-q", "--quiet", action="store_true", help="warnings only, no summary table")
    common.add_argument("--config", type=Path, help="key = value config file (flags win)")
    common.add_argument("--design", help="htc, cbsc, unary, exact (fir/dct: also oracle)")
    common.add_argument("--bits", type=int, help="operand width N (default 8)")
    common.add_argument("--fanin", type=int, help="MAC fan-in K (default 4)")
    common.add_argument("--polarity", choices=["unipolar", "bipolar"])
    common.add_argument("--trials", type=int, help="bench trials (default 100000)")
    common.add_argument("--seed", type=int, help="random seed (default 42)")
    common.add_argument("--lfsr-width", dest="lfsr_width", type=int)
    common.add_argument("--lfsr-taps", dest="lfsr_taps", type=_int_list, help="comma separated, e.g. 8,6,5,4")
    common.add_argument("--lfsr-seed", dest="lfsr_seed", type=_int_auto, help="LFSR start state (default 0x5A)")
    common.add_argument("--selector", choices=["lfsr", "round_robin", "counter"])
    common.add_argument("--normalization", choices=["unit", "fanin"])
    common.add_argument("--vectors", choices=["uniform", "zero"])
    common.add_argument("--reference", choices=["original", "filtered"])
    common.add_argument("--mode", choices=["separable", "rows"])
    common.add_argument("--taps", type=_float_list, help="comma separated FIR taps")
    common.add_argument("--evaluations", type=int, help="activity evaluations (default 1000)")
    common.add_argument("--threads", type=int, help="worker threads (default HTC_SIM_THREADS or 1)")
    common.add_argument("--input", type=Path)
    common.add_argument("--output", type=Path)
    common.add_argument("--metrics", type=Path)
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="htcsim", description="Hybrid temporal computing simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()
    for name, (func, help_text) in COMMANDS.items():
        sub = subparsers.add_parser(name, parents=[common], help=help_text, description=help_text)
        sub.set_defaults(func=func)
    return parser


_META_KEYS = {"command", "func", "verbose", "quiet", "config"}


def _write_csv(rows: Rows, path: Optional[Path]) -> None:
    if not rows:
        return
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if path is None:
        sys.stdout.write(buffer.getvalue())
        sys.stdout.flush()
    else:
        path.write_text(buffer.getvalue(), encoding="utf-8")
        logger.info(f"wrote {len(rows)} rows to {path}")


def _summary(console: Console, command: str, rows: Rows) -> None:
    if not rows or command == "mul-sweep":
        return
    table = Table(title=f"htcsim {command}")
    columns = [k for k in rows[0] if k != "schema"]
    for column in columns:
        table.add_column(column, justify="right" if column != "design" else "left")
    for row in rows:
        table.add_row(*(str(row[c]) for c in columns))
    console.print(table)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    console = Console(stderr=True)

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    setup_logging(level=level, console=console)

    try:
        file_values = read_config_values(args.config) if args.config is not None else {}
        flags = {k: v for k, v in vars(args).items() if k not in _META_KEYS}
        cfg = RunConfig.merged(file_values, flags)
        func = args.func
        rows = func(cfg)
        target = cfg.metrics if args.command in _METRICS_COMMANDS else cfg.output
        _write_csv(rows, target)
    except (ConfigurationError, ValidationError) as e:
        console.print(f"[bold red]configuration error:[/] {escape(str(e))}")
        return EXIT_CONFIG
    except (HtcSimError, OSError) as e:
        console.print(f"[bold red]error:[/] {escape(str(e))}")
        return EXIT_DATA

    if not args.quiet:
        _summary(console, args.command, rows)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
