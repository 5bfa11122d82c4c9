"""Command-line front end.

Every subcommand writes one JSON (or text) report. Exit codes: 0 when the
checked statement holds, 2 when it is falsified or a proven implication
failed, 1 for unreadable input or a failed precondition.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Sequence, TypeVar

import numpy as np
from pydantic import ValidationError

from isec.core.config import RunConfig, Settings, get_settings
from isec.core.errors import ConsistencyError, InstanceError, IsecError
from isec.core.numeric import to_exact
from isec.domain.constants import QIConstants
from isec.domain.documents import (
    InstanceDocument,
    LinearInstanceDocument,
    LinearSectionDocument,
    SectionDocument,
)
from isec.domain.fibration import Fibration, Label, Section
from isec.domain.linear import LinearFibration, LinearSection
from isec.domain.metric import FiniteMetricSpace
from isec.domain.reports import Report
from isec.infrastructure.instance_io import dumps, load_document, render_text, write_json
from isec.services import generators
from isec.services.qi_analysis import minimal_M
from isec.services.regularity import build_regularity_report, transfer_regularity
from isec.services.reporting import (
    algebra_report,
    battery_report,
    check_report,
    cones_report,
    frontier_report,
    relation_report,
    relative_report,
)

logger = logging.getLogger(__name__)

EXIT_VERIFIED = 0
EXIT_ERROR = 1
EXIT_FALSIFIED = 2

T = TypeVar("T")


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors: exit 1, leaving 2 for falsified statements."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _number(text: str) -> str:
    """Validate a scalar argument ("2", "0.5" or "3/2") and keep its text."""
    try:
        to_exact(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    return text


# --- argument parsing -------------------------------------------------------------


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--output", type=Path, default=None, help="report file (default: stdout)")
    common.add_argument("--format", choices=["json", "text"], default=settings.report_format)
    common.add_argument("--seed", type=int, default=settings.seed)
    common.add_argument("--tolerance", type=float, default=settings.tolerance)
    common.add_argument("--threads", type=int, default=settings.threads)
    common.add_argument(
        "--oracle",
        action="store_true",
        default=settings.oracle_checks,
        help="cross-run the brute-force oracles and fail on disagreement",
    )

    parser = _Parser(prog="isec", description="Quasi-isometric sections of finite fibrations.")
    commands = parser.add_subparsers(dest="subcommand", required=True)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        return commands.add_parser(name, parents=[common], help=help_text)

    def constants(sub: argparse.ArgumentParser, prefix: str = "") -> None:
        sub.add_argument(f"--{prefix}L", dest=f"{prefix.replace('-', '_')}L", type=_number, default="1")
        sub.add_argument(f"--{prefix}M", dest=f"{prefix.replace('-', '_')}M", type=_number, default="0")

    sub = command("validate", "validate an instance (and optionally a section)")
    sub.add_argument("--instance", type=Path, required=True)
    sub.add_argument("--section", type=Path)
    sub.add_argument("--linear", action="store_true", help="the documents describe a linear model")

    sub = command("check", "decide (L, M)-quasi-isometry of a section")
    sub.add_argument("--instance", type=Path, required=True)
    sub.add_argument("--section", type=Path, required=True)
    constants(sub)

    sub = command("frontier", "exact frontier of admissible constants")
    sub.add_argument("--instance", type=Path, required=True)
    sub.add_argument("--section", type=Path, required=True)

    sub = command("cones", "check that the graph avoids every cone")
    sub.add_argument("--instance", type=Path, required=True)
    sub.add_argument("--section", type=Path, required=True)
    constants(sub)

    sub = command("relative", "relative quasi-isometry against a reference section")
    sub.add_argument("--instance", type=Path, required=True)
    sub.add_argument("--section", type=Path, required=True)
    sub.add_argument("--reference", type=Path, required=True)
    sub.add_argument("--base", required=True, help="label where both sections agree")
    sub.add_argument("--strong", action="store_true")
    constants(sub)

    sub = command("relation", "reflexivity, symmetry and transitivity of the strong relation")
    sub.add_argument("--instance", type=Path, required=True)
    sub.add_argument("--section", type=Path, action="append", required=True)
    sub.add_argument("--base", required=True)
    sub.add_argument("--L", dest="L", type=_number, default="1")

    sub = command("algebra", "convexity and vector-space closure on a linear instance")
    sub.add_argument("--instance", type=Path, required=True)
    sub.add_argument("--section", type=Path, required=True)
    sub.add_argument("--other", type=Path, required=True)
    sub.add_argument("--reference", type=Path, required=True)
    sub.add_argument("--base", type=int, default=0, help="grid index where the sections agree")
    sub.add_argument("--L", dest="L", type=float, default=1.0)
    sub.add_argument("--t", dest="t", type=float, action="append")

    sub = command("regularity", "transfer large-scale regularity between sections")
    sub.add_argument("--instance", type=Path, required=True)
    sub.add_argument("--section", type=Path, required=True)
    sub.add_argument("--reference", type=Path, help="section the estimate is built on")
    constants(sub)
    constants(sub, "reference-")
    sub.add_argument("--Q", dest="Q", type=_number, default="1")
    sub.add_argument("--r0", type=_number, default="1")
    sub.add_argument("--r-grid", dest="r_grid", type=_number, nargs="+", default=["2", "3", "4", "5"])

    sub = command("generate", "write a generated instance and canonical sections")
    sub.add_argument(
        "--kind", choices=["grid", "cyclic_product", "random", "linear"], required=True
    )
    sub.add_argument("--out-dir", dest="out_dir", type=Path, required=True)
    sub.add_argument("--rows", type=int, default=3)
    sub.add_argument("--cols", type=int, default=3)
    sub.add_argument("--norm", choices=["l1", "l2", "linf"], default=None)
    sub.add_argument("--m", type=int, default=3)
    sub.add_argument("--n", type=int, default=3)
    sub.add_argument("--fibers", type=int, default=4)
    sub.add_argument("--max-fiber-size", dest="max_fiber_size", type=int, default=3)
    sub.add_argument("--A", dest="A", default="[[1, 0]]", help="JSON matrix of the linear map")
    sub.add_argument("--grid-range", dest="grid_range", type=int, nargs=2, default=[-5, 5])
    sub.add_argument("--fiber-radius", dest="fiber_radius", type=float, default=None)

    sub = command("report", "run the whole battery on one section")
    sub.add_argument("--instance", type=Path, required=True)
    sub.add_argument("--section", type=Path, required=True)
    constants(sub)
    sub.add_argument("--r-grid", dest="r_grid", type=_number, nargs="+", default=["2", "3", "4", "5"])
    return parser


_PATH_ARGUMENTS = ("instance", "section", "other", "reference")
_COMMON_ARGUMENTS = ("subcommand", "output", "format", "seed", "tolerance", "threads", "oracle")


def build_config(args: argparse.Namespace) -> RunConfig:
    """Split parsed arguments into input paths and subcommand options."""
    values = vars(args)
    inputs: Dict[str, Path] = {}
    options: Dict[str, object] = {}
    for key, value in values.items():
        if key in _COMMON_ARGUMENTS or value is None:
            continue
        if key == "section" and isinstance(value, list):
            inputs.update({f"section{k}": path for k, path in enumerate(value)})
        elif key in _PATH_ARGUMENTS:
            inputs[key] = value
        elif isinstance(value, Path):
            options[key] = str(value)
        else:
            options[key] = value
    return RunConfig(
        subcommand=args.subcommand,
        inputs=inputs,
        output=args.output,
        tolerance=args.tolerance,
        seed=args.seed,
        threads=args.threads,
        report_format=args.format,
        oracle=args.oracle,
        options=options,
    )


# --- loading ------------------------------------------------------------------------


def _describe(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(p) for p in error["loc"]) or "<root>"
        parts.append(f"{location}: {error['msg']}")
    return "; ".join(parts)


def _loaded(path: Path, action: Callable[[], T]) -> T:
    """Run ``action`` and qualify any input error with ``path``."""
    try:
        return action()
    except ValidationError as exc:
        raise InstanceError(f"{path}: {_describe(exc)}") from exc
    except IsecError as exc:
        raise type(exc)(f"{path}: {exc}") from exc


def _instance(config: RunConfig) -> Fibration:
    path = config.inputs["instance"]
    return _loaded(path, lambda: load_document(path, InstanceDocument).build(config.tolerance))


def _section(config: RunConfig, fibration: Fibration, name: str = "section") -> Section:
    path = config.inputs[name]
    return _loaded(path, lambda: load_document(path, SectionDocument).build(fibration))


def _linear_instance(config: RunConfig) -> LinearFibration:
    path = config.inputs["instance"]
    return _loaded(path, lambda: load_document(path, LinearInstanceDocument).build())


def _linear_section(config: RunConfig, fibration: LinearFibration, name: str) -> LinearSection:
    path = config.inputs[name]
    return _loaded(path, lambda: load_document(path, LinearSectionDocument).build(fibration))


def _label(fibration: Fibration, text: object) -> Label:
    for y in fibration.labels:
        if str(y) == str(text):
            return y
    raise InstanceError(f"unknown label {text!r}")


def _constants(space: FiniteMetricSpace, options: Dict[str, object], prefix: str = "") -> QIConstants:
    return QIConstants(L=space.coerce(options[f"{prefix}L"]), M=space.coerce(options[f"{prefix}M"]))


def _echo(config: RunConfig) -> Dict[str, Any]:
    echo: Dict[str, Any] = {name: str(path) for name, path in config.inputs.items()}
    echo.update(config.options)
    return echo


# --- subcommands ----------------------------------------------------------------------


def _validate(config: RunConfig) -> Report:
    notes: List[str] = []
    if config.options.get("linear"):
        fibration = _linear_instance(config)
        notes.append(f"linear map R^{fibration.ambient_dim} -> R^{fibration.target_dim}")
        notes.append(f"{len(fibration.y_grid)} grid points")
        if "section" in config.inputs:
            _linear_section(config, fibration, "section")
            notes.append("section is valid")
    else:
        fibration = _instance(config)
        notes.append(f"{fibration.space.size} points")
        notes.append(f"{len(fibration.labels)} labels")
        if "section" in config.inputs:
            _section(config, fibration)
            notes.append("section is valid")
    return Report(subcommand="validate", verdict=True, seed=config.seed, inputs=_echo(config), notes=notes)


def _check(config: RunConfig) -> Report:
    section = _section(config, _instance(config))
    return check_report(
        section, _constants(section.space, config.options), config.seed, _echo(config),
        oracle=config.oracle,
    )


def _frontier(config: RunConfig) -> Report:
    section = _section(config, _instance(config))
    return frontier_report(section, config.seed, _echo(config), oracle=config.oracle)


def _cones(config: RunConfig) -> Report:
    section = _section(config, _instance(config))
    return cones_report(
        section, _constants(section.space, config.options), config.seed, _echo(config),
        oracle=config.oracle,
    )


def _relative(config: RunConfig) -> Report:
    fibration = _instance(config)
    phi = _section(config, fibration)
    psi = _section(config, fibration, "reference")
    return relative_report(
        phi,
        psi,
        _label(fibration, config.options["base"]),
        _constants(fibration.space, config.options),
        strong=bool(config.options.get("strong")),
        seed=config.seed,
        inputs=_echo(config),
    )


def _relation(config: RunConfig) -> Report:
    fibration = _instance(config)
    names = sorted((n for n in config.inputs if n.startswith("section")), key=lambda n: int(n[7:]))
    sections = [_section(config, fibration, name) for name in names]
    return relation_report(
        sections,
        _label(fibration, config.options["base"]),
        fibration.space.coerce(config.options["L"]),
        seed=config.seed,
        inputs=_echo(config),
        threads=config.threads,
        oracle=config.oracle,
    )


def _algebra(config: RunConfig) -> Report:
    fibration = _linear_instance(config)
    phi = _linear_section(config, fibration, "section")
    eta = _linear_section(config, fibration, "other")
    psi = _linear_section(config, fibration, "reference")
    t_values = config.options.get("t") or (0.0, 0.25, 0.5, 0.75, 1.0)
    return algebra_report(
        phi,
        eta,
        psi,
        int(config.options["base"]),  # type: ignore[call-overload]
        t_values=t_values,  # type: ignore[arg-type]
        L=float(config.options["L"]),  # type: ignore[arg-type]
        seed=config.seed,
        inputs=_echo(config),
    )


def _regularity(config: RunConfig) -> Report:
    fibration = _instance(config)
    psi = _section(config, fibration)
    phi = _section(config, fibration, "reference") if "reference" in config.inputs else psi
    options = config.options
    estimate = build_regularity_report(
        phi,
        _constants(fibration.space, options, "reference_"),
        options["Q"],
        options["r0"],
        options["r_grid"],  # type: ignore[arg-type]
        threads=config.threads,
    )
    report = transfer_regularity(
        psi, estimate, options["L"], options["M"], options["r_grid"],  # type: ignore[arg-type]
        threads=config.threads,
    )
    return report.model_copy(update={"seed": config.seed, "inputs": _echo(config)})


def _report(config: RunConfig) -> Report:
    section = _section(config, _instance(config))
    return battery_report(
        section,
        _constants(section.space, config.options),
        config.options["r_grid"],  # type: ignore[arg-type]
        seed=config.seed,
        inputs=_echo(config),
        oracle=config.oracle,
    )


def _is_matrix(value: object) -> bool:
    if not isinstance(value, list) or not value:
        return False
    return all(
        isinstance(row, list)
        and row
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in row)
        for row in value
    )


def _generate(config: RunConfig) -> Report:
    options = config.options
    out_dir = Path(str(options["out_dir"]))
    rng = np.random.default_rng(config.seed)
    kind = options["kind"]
    written: Dict[str, object] = {}
    notes: List[str] = []

    if kind == "linear":
        try:
            A = json.loads(str(options["A"]))
        except json.JSONDecodeError as exc:
            raise InstanceError(f"--A is not a JSON matrix: {exc.msg}") from exc
        if not _is_matrix(A):
            raise InstanceError(
                f"--A must be a nonempty list of numeric rows, got {options['A']!r}"
            )
        fibration = generators.linear_instance(
            A,
            grid_range=tuple(options["grid_range"]),  # type: ignore[arg-type]
            norm=options.get("norm") or "l2",  # type: ignore[arg-type]
            fiber_radius=options.get("fiber_radius"),  # type: ignore[arg-type]
        )
        base = generators.random_linear_section(fibration, rng, spread=0.0)
        anchor = (0, base.vectors[0])
        written["instance.json"] = LinearInstanceDocument.from_fibration(fibration)
        written["identity.json"] = LinearSectionDocument.from_section(base)
        for name in ("random.json", "other.json"):
            section = generators.random_linear_section(fibration, rng, anchor=anchor)
            written[name] = LinearSectionDocument.from_section(section)
        notes.append("random.json and other.json agree with identity.json at grid index 0")
    else:
        if kind == "grid":
            norm = options.get("norm") or "linf"
            if norm not in ("l1", "linf"):
                raise InstanceError(f"grid instances take l1 or linf, not {norm}")
            fib = generators.grid_instance(int(options["rows"]), int(options["cols"]), norm)  # type: ignore[call-overload]
            grid = (int(options["rows"]), int(options["cols"])) if norm == "linf" else None  # type: ignore[call-overload]
        elif kind == "cyclic_product":
            fib = generators.cyclic_product_instance(int(options["m"]), int(options["n"]))  # type: ignore[call-overload]
            grid = None
        else:
            fib = generators.random_instance(
                rng,
                int(options["fibers"]),  # type: ignore[call-overload]
                int(options["max_fiber_size"]),  # type: ignore[call-overload]
                norm=options.get("norm") or "l1",  # type: ignore[arg-type]
            )
            grid = None
        sections = {
            "identity.json": generators.identity_row_section(fib),
            "zigzag.json": generators.zigzag_section(fib),
            "random.json": generators.random_section(fib, rng),
        }
        written["instance.json"] = InstanceDocument.from_fibration(fib, grid=grid)
        for name, section in sections.items():
            written[name] = SectionDocument.from_section(section)
            one = section.space.coerce(1)
            notes.append(f"{name} is (1, {minimal_M(section, one)})-QI")

    for name, document in written.items():
        write_json(out_dir / name, document)
    notes.extend(str(out_dir / name) for name in written)
    return Report(subcommand="generate", verdict=True, seed=config.seed, inputs=_echo(config), notes=notes)


_HANDLERS: Dict[str, Callable[[RunConfig], Report]] = {
    "validate": _validate,
    "check": _check,
    "frontier": _frontier,
    "cones": _cones,
    "relative": _relative,
    "relation": _relation,
    "algebra": _algebra,
    "regularity": _regularity,
    "generate": _generate,
    "report": _report,
}


def emit(report: Report, config: RunConfig) -> None:
    text = render_text(report) if config.report_format == "text" else dumps(report)
    if config.output is None:
        sys.stdout.write(text)
        return
    config.output.parent.mkdir(parents=True, exist_ok=True)
    config.output.write_text(text, encoding="utf-8")


def run(config: RunConfig) -> int:
    """Run one subcommand, emit its report and return the exit code."""
    logger.info("running %s", config.subcommand)
    try:
        report = _HANDLERS[config.subcommand](config)
        emit(report, config)
    except ConsistencyError as exc:
        logger.error("consistency failure: %s", exc)
        print(f"isec {config.subcommand}: consistency failure: {exc}", file=sys.stderr)
        return EXIT_FALSIFIED
    except ValidationError as exc:
        print(f"isec {config.subcommand}: {_describe(exc)}", file=sys.stderr)
        return EXIT_ERROR
    except IsecError as exc:
        print(f"isec {config.subcommand}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        logger.error("i/o failure: %s", exc)
        print(f"isec {config.subcommand}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_VERIFIED if report.verdict else EXIT_FALSIFIED


def main(argv: Sequence[str] | None = None) -> int:
    try:
        settings = get_settings()
    except ValidationError as exc:
        print(f"isec: bad environment: {_describe(exc)}", file=sys.stderr)
        return EXIT_ERROR
    logging.basicConfig(
        level=settings.log_level,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser(settings).parse_args(argv)
    try:
        config = build_config(args)
    except ValidationError as exc:
        print(f"isec {args.subcommand}: {_describe(exc)}", file=sys.stderr)
        return EXIT_ERROR
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
