"""Shared exceptions and identifier ordering."""
import re
from pathlib import Path
from typing import Tuple, Union

_DIGITS = re.compile(r"(\d+)")


class RideMatchError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(RideMatchError, ValueError):
    pass


class EmptyInputError(InvalidInputError):
    pass


class UnsupportedInstanceError(InvalidInputError):
    """The instance is valid but outside what the chosen algorithm handles."""


class UndefinedMetricError(RideMatchError, ValueError):
    pass


class SizeGuardError(RideMatchError):
    """Raised when an exhaustive computation would exceed its size limit."""


class ConfigError(RideMatchError, ValueError):
    pass


def id_key(identifier) -> Tuple[Union[int, str], ...]:
    """Natural sort key so that ``D2`` sorts before ``D10``."""
    parts = _DIGITS.split(str(identifier))
    return tuple((0, int(p)) if p.isdigit() else (1, p) for p in parts if p != "")


def sort_ids(ids):
    return sorted(ids, key=id_key)


def fixture_path(name: str) -> Path:
    """Path of a bundled worked-example fixture."""
    path = Path(__file__).parent / "fixtures" / "worked" / name
    if not path.exists():
        raise FileNotFoundError(path)
    return path
