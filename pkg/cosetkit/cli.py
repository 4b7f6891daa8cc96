"""
CLI Module

Command-line entry point. One sub-command per registered command, with
options generated from the command's request model, plus `serve` for the
HTTP surface.

Usage:
    cosetkit tables --m 3
    cosetkit encode --message 01 --preset example2
    cosetkit energy --config runs/example3.json
    cosetkit simulate --config runs/ldpc.json --workers 4
    cosetkit capacity --m 4 --rate 5.3333
    cosetkit serve --port 8000

Exit codes: 0 success, 1 configuration or parameter error, 2 I/O error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import types
from collections.abc import Sequence
from pathlib import Path
from typing import Any, Literal, NoReturn, Union, get_args, get_origin

from pydantic import BaseModel
from pydantic import ValidationError as PydanticValidationError
from pydantic.fields import FieldInfo
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from . import __version__
from .errors import ConfigError, CosetKitError
from .registry import CommandInfo, get_registry
from .server import load_command_modules, serialize_result, serve

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2

console = Console()


def setup_logging(debug: bool = False) -> None:
    """Configure logging for cosetkit."""
    level = logging.DEBUG if debug else logging.INFO
    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    rich_handler = RichHandler(
        level=level,
        console=Console(stderr=True),
        show_time=False,
        show_level=True,
        show_path=debug,
        markup=True,
        rich_tracebacks=True,
    )

    logging.basicConfig(
        level=level,
        handlers=[rich_handler],
        format="%(message)s",
    )


def _unwrap_optional(annotation: Any) -> Any:
    if get_origin(annotation) in (Union, types.UnionType):
        args = [a for a in get_args(annotation) if a is not type(None)]
        if len(args) == 1:
            return args[0]
    return annotation


def _add_field(parser: argparse.ArgumentParser, name: str, field: FieldInfo) -> None:
    flag = "--" + name.replace("_", "-")
    annotation = _unwrap_optional(field.annotation)
    kwargs: dict[str, Any] = {"dest": name, "help": field.description}
    if field.is_required():
        kwargs["required"] = True
    else:
        kwargs["default"] = None

    origin = get_origin(annotation)
    if annotation is bool:
        kwargs["action"] = argparse.BooleanOptionalAction
    elif origin is Literal:
        kwargs["choices"] = list(get_args(annotation))
    elif origin is list:
        (item,) = get_args(annotation) or (str,)
        kwargs["nargs"] = "+"
        kwargs["type"] = item if item in (int, float, str, Path) else str
    elif annotation in (int, float, str, Path):
        kwargs["type"] = annotation
    parser.add_argument(flag, **kwargs)


class CommandParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors as ConfigError."""

    def error(self, message: str) -> NoReturn:
        raise ConfigError(f"{self.prog}: {message}", {"usage": self.format_usage().strip()})


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser from the registered commands."""
    parser = CommandParser(prog="cosetkit", description="Coset shaping toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    parser.add_argument("--json", action="store_true", help="Print results as JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    for cmd in get_registry().get_all_commands().values():
        cmd_parser = sub.add_parser(cmd.name, help=cmd.summary, description=cmd.docstring)
        for name, field in cmd.request_model.model_fields.items():
            _add_field(cmd_parser, name, field)

    serve_parser = sub.add_parser("serve", help="Serve the commands over HTTP")
    serve_parser.add_argument("--host", default="127.0.0.1")
    serve_parser.add_argument("--port", type=int, default=8000)
    return parser


def _scalar_rows(model: BaseModel) -> list[tuple[str, str]]:
    rows = []
    for name, value in model.model_dump(mode="json").items():
        if isinstance(value, list) and value and isinstance(value[0], dict):
            continue
        rows.append((name, "-" if value is None else str(value)))
    return rows


def render_result(cmd: CommandInfo, result: Any, out: Console | None = None) -> None:
    """Print a command result as rich tables."""
    out = out or console
    if not isinstance(result, BaseModel):
        out.print(result)
        return

    scalars = _scalar_rows(result)
    if scalars:
        table = Table(title=cmd.name, show_header=False, box=None)
        table.add_column(style="bold cyan")
        table.add_column()
        for name, value in scalars:
            table.add_row(name, value)
        out.print(table)

    for name, value in result.model_dump(mode="json").items():
        if not (isinstance(value, list) and value and isinstance(value[0], dict)):
            continue
        table = Table(title=name)
        columns = list(value[0])
        for column in columns:
            table.add_column(column)
        for item in value:
            table.add_row(*("-" if item[c] is None else str(item[c]) for c in columns))
        out.print(table)


def _error(title: str, message: str) -> None:
    console.print(Panel.fit(message, title=title, border_style="red"))


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line. Returns the process exit code."""
    load_command_modules()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as e:
        console.print(e.details["usage"], markup=False)
        _error(e.code, e.message)
        return EXIT_CONFIG
    setup_logging(args.debug)

    if args.command == "serve":
        serve(host=args.host, port=args.port, debug=args.debug)
        return EXIT_OK

    cmd = get_registry().get_command(args.command)
    assert cmd is not None
    payload = {
        name: getattr(args, name)
        for name in cmd.request_model.model_fields
        if getattr(args, name) is not None
    }

    try:
        result = cmd.run(payload)
    except CosetKitError as e:
        _error(e.code, e.message)
        if args.debug and e.details is not None:
            console.print(e.details)
        return e.exit_code
    except PydanticValidationError as e:
        _error("VALIDATION_ERROR", str(e))
        return EXIT_CONFIG
    except OSError as e:
        _error("IO_ERROR", str(e))
        return EXIT_IO

    if args.json:
        console.print_json(data=serialize_result(result))
    else:
        render_result(cmd, result)
    return EXIT_OK
