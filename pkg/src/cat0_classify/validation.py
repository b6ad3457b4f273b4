"""Input validation for groups, scales and choices coming from users or files."""

from __future__ import annotations

from fractions import Fraction

from .isometries import GroupSpec
from .presets import PRESETS, preset

AXES_CHOICES = ("enumerated", "full", "root")
FAMILY_NAMES = ("fin", "vc", "fbc")


class ConfigError(ValueError):
    """Raised for invalid user input; the CLI maps it to exit status 2."""


def check_rational(value, name: str, positive: bool = True) -> Fraction:
    """Accept ints, Fractions and strings such as ``"3"`` or ``"5/2"``."""
    if isinstance(value, bool) or isinstance(value, float):
        raise ConfigError(f"{name} must be an exact rational, got {value!r}")
    try:
        q = Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError(f"{name} must be a rational number, got {value!r}") from None
    if positive and q <= 0:
        raise ConfigError(f"{name} must be positive, got {q}")
    return q


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{name} must be an integer")
    try:
        n = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be an integer, got {value!r}") from None
    if str(value).strip() != str(n) and not isinstance(value, int):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if n < minimum:
        raise ConfigError(f"{name} must be at least {minimum}, got {n}")
    return n


def check_choice(value, name: str, choices) -> str:
    if value not in choices:
        raise ConfigError(f"{name} must be one of {', '.join(choices)}; got {value!r}")
    return value


def check_group(group, depth: int = 12) -> GroupSpec:
    """A preset name or an already constructed group."""
    if isinstance(group, GroupSpec):
        return group
    if isinstance(group, str):
        if group not in PRESETS:
            raise ConfigError(f"unknown group preset {group!r}; known: {', '.join(sorted(PRESETS))}")
        return preset(group, depth=check_positive_int(depth, "depth"))
    raise ConfigError(f"expected a group preset name or a group, got {type(group).__name__}")


def check_battery(battery, group):
    """``None`` or ``"default"`` for the preset battery, else a list of rows."""
    from .classifying import BatteryRow, default_battery

    if battery is None or battery == "default":
        return default_battery(group)
    if isinstance(battery, str):
        names = [x.strip() for x in battery.split(",") if x.strip()]
        rows = {r.name: r for r in default_battery(group)}
        unknown = [n for n in names if n not in rows]
        if unknown:
            raise ConfigError(f"battery rows not available for {group.name}: {', '.join(unknown)}")
        return [rows[n] for n in names]
    rows = list(battery)
    for r in rows:
        if not isinstance(r, BatteryRow):
            raise ConfigError("battery entries must be BatteryRow instances")
        for g in r.generators:
            if not group.contains(g):
                raise ConfigError(f"battery row {r.name!r} has a generator outside {group.name}")
    return rows
