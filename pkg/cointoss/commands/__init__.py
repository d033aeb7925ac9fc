"""Sub-commands of the command-line front end.

Each module registers its parsers with ``register(subparsers, common)`` and binds
a handler ``(args, config) -> CommandResult`` through ``set_defaults``.
"""
import argparse
import json
from pathlib import Path
from typing import Any, NamedTuple, Optional

from pydantic import BaseModel


class CommandResult(NamedTuple):
    exit_status: int
    summary: str
    artifact: Optional[BaseModel] = None
    report: Any = None


# argparse destination -> path of the RunConfig field it overrides
OVERRIDES = {
    "sequence": ("sequence",),
    "q_grid": ("q_grid",),
    "alpha_grid": ("alpha_grid",),
    "legendre_q_grid": ("legendre_q_grid",),
    "kink_grid": ("kink_grid",),
    "depths": ("depths",),
    "tail_fraction": ("tail_fraction",),
    "q": ("q",),
    "s": ("s",),
    "seed": ("seed",),
    "enumeration_depth": ("enumeration_depth",),
    "bins": ("coarse_bins",),
    "output": ("output",),
    "sample_depth": ("sampling", "depth"),
    "samples": ("sampling", "samples"),
    "sample_q": ("sampling", "q"),
    "targets": ("construction", "targets"),
    "stages": ("construction", "stages"),
    "palette": ("construction", "palette"),
    "horizon": ("construction", "horizon"),
    "resume": ("construction", "resume"),
    "nesting": ("construction", "nesting"),
}


def overrides_from(args: argparse.Namespace) -> dict:
    data: dict = {}
    for dest, path in OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        target = data
        for key in path[:-1]:
            target = target.setdefault(key, {})
        target[path[-1]] = str(value) if isinstance(value, Path) else value
    return data


def grid(text: str) -> dict:
    """``start:stop:step``."""
    try:
        start, stop, step = (float(part) for part in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
    return {"start": start, "stop": stop, "step": step}


def depth_list(text: str) -> dict:
    """Comma separated depths, or ``geometric:start:stop:count`` /
    ``linear:start:stop:step`` / ``block_ends:start:stop``."""
    try:
        if text[:1].isdigit():
            return {"kind": "explicit", "depths": [int(d) for d in text.split(",")]}
        kind, *numbers = text.split(":")
        values = [int(v) for v in numbers]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot read a depth schedule from {text!r}")
    if kind == "geometric" and len(values) == 3:
        return {"kind": kind, "start": values[0], "stop": values[1], "count": values[2]}
    if kind == "linear" and len(values) == 3:
        return {"kind": kind, "start": values[0], "stop": values[1], "step": values[2]}
    if kind == "block_ends" and len(values) == 2:
        return {"kind": kind, "start": values[0], "stop": values[1]}
    raise argparse.ArgumentTypeError(f"unknown depth schedule {text!r}")


def sequence(text: str) -> dict:
    """Weight sequence as JSON, ``@file.json``, or the shorthand ``constant:P`` /
    ``periodic:P1,P2,...``."""
    try:
        if text.startswith("@"):
            return json.loads(Path(text[1:]).read_text(encoding="utf-8"))
        if text.startswith("{"):
            return json.loads(text)
        kind, _, body = text.partition(":")
        if kind == "constant":
            return {"kind": "constant", "p": float(body)}
        if kind in ("periodic", "explicit"):
            return {"kind": kind, "weights": [float(v) for v in body.split(",")]}
    except (OSError, ValueError) as exc:
        raise argparse.ArgumentTypeError(f"cannot read a weight sequence from {text!r}: {exc}")
    raise argparse.ArgumentTypeError(f"unknown weight sequence {text!r}")


def floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="RunConfig JSON file")
    common.add_argument("--output", type=Path, help="output file (stdout when omitted)")
    common.add_argument("--record", action="store_true", help="store the run in the archive")
    common.add_argument("--sequence", type=sequence,
                        help="weight sequence: JSON, @file.json, constant:P or periodic:P1,P2")
    common.add_argument("--seed", type=int)
    return common
