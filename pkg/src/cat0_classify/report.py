"""Run configuration, flat key-value config files and JSON verification reports."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from fractions import Fraction
from pathlib import Path

from .validation import AXES_CHOICES, ConfigError, check_choice, check_group, check_positive_int, check_rational

SCHEMA_VERSION = "1.0"
TOOL_VERSION = "0.1.0"

# keys accepted in config files; units are lengths in the model space metric
_KEYS = {
    "group": str,
    "window": "length",
    "axes_bound": "length",
    "depth": int,
    "sphere_dim": int,
    "axes_choice": str,
    "battery": str,
    "out": str,
    "seed": int,
}
_ALIASES = {"window_R": "window", "R": "window", "sphere-dim": "sphere_dim", "axes-bound": "axes_bound", "axes-choice": "axes_choice"}


@dataclass(frozen=True)
class RunConfig:
    group: str = "p1"
    window: Fraction = Fraction(2)
    axes_bound: Fraction = Fraction(1)
    depth: int = 12
    sphere_dim: int = 3
    axes_choice: str = "enumerated"
    battery: str = "default"
    out: str = "out"
    seed: int = 0

    def validated(self) -> "RunConfig":
        check_group(self.group, self.depth)
        check_choice(self.axes_choice, "axes_choice", AXES_CHOICES)
        return replace(
            self,
            window=check_rational(self.window, "window"),
            axes_bound=check_rational(self.axes_bound, "axes_bound"),
            depth=check_positive_int(self.depth, "depth"),
            sphere_dim=check_positive_int(self.sphere_dim, "sphere_dim"),
            seed=check_positive_int(self.seed, "seed", minimum=0),
        )

    def echo(self) -> dict:
        return {k: str(v) if isinstance(v, Fraction) else v for k, v in asdict(self).items()}

    def with_overrides(self, **kw) -> "RunConfig":
        known = {f.name for f in fields(self)}
        return replace(self, **{k: v for k, v in kw.items() if k in known and v is not None})


def _parse_length(text: str) -> Fraction:
    # "2", "5/2" or "2 units"
    parts = text.split()
    if len(parts) == 2 and parts[1] in ("unit", "units"):
        text = parts[0]
    elif len(parts) != 1:
        raise ConfigError(f"cannot read a length from {text!r}")
    return check_rational(text, "length")


def parse_config(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {n}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        key = _ALIASES.get(key, key)
        kind = _KEYS.get(key)
        if kind is None:
            raise ConfigError(f"config line {n}: unknown key {key!r}")
        if kind == "length":
            out[key] = _parse_length(value)
        elif kind is int:
            out[key] = check_positive_int(value, key, minimum=0)
        else:
            out[key] = value
    return out


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return RunConfig().with_overrides(**parse_config(text))


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in x]
        return sorted(items, key=repr) if isinstance(x, (set, frozenset)) else items
    return x


def build_report(command: str, config: RunConfig, metadata: dict, verification=None, status: str = "ok", reason: str | None = None) -> dict:
    rows = verification.as_dict()["rows"] if verification is not None else []
    passed = verification.passed if verification is not None else status == "ok"
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": TOOL_VERSION,
        "command": command,
        "config": config.echo(),
        "seed": config.seed,
        "status": status,
        "passed": passed and status == "ok",
        "metadata": metadata,
        "checks": verification.checks if verification is not None else {},
        "rows": rows,
    }
    if reason:
        report["reason"] = reason
    for row in rows:
        if not row.get("certificate"):
            raise ValueError(f"row {row.get('name')} has no certificate level")
    return _jsonable(report)


def dump_report(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
