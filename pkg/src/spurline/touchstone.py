"""Touchstone version-1 two-port S-parameter files.

Strict reader and writer for the classic .s2p layout: an optional
option line ``# <unit> S <format> R <ohms>`` followed by data rows of
nine numbers, ``f  S11  S21  S12  S22`` with each parameter as a pair
in MA (magnitude, degrees), DB (20*log10 magnitude, degrees), or RI
(real, imaginary) form.  ``!`` starts a comment.  Version-2 keyword
blocks are rejected.  Frequencies are exact integer Hz end to end.
"""

from __future__ import annotations

import bisect
import cmath
import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation

from .errors import SpurlineError

FREQ_UNITS = {"HZ": 0, "KHZ": 3, "MHZ": 6, "GHZ": 9}
FORMATS = ("MA", "DB", "RI")


class TouchstoneError(SpurlineError):
    """Problem with a Touchstone document; carries the offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class MalformedOptionLine(TouchstoneError):
    pass


class WrongPortCount(TouchstoneError):
    pass


class NonMonotoneGrid(TouchstoneError):
    pass


class BadNumericField(TouchstoneError):
    pass


class OutOfRange(SpurlineError):
    """Query outside the measured frequency or separation span."""


@dataclass(frozen=True)
class TwoPortSParams:
    freq_grid_hz: tuple[int, ...]
    s11: tuple[complex, ...]
    s21: tuple[complex, ...]
    s12: tuple[complex, ...]
    s22: tuple[complex, ...]
    reference_impedance_ohms: float = 50.0

    def __post_init__(self):
        n = len(self.freq_grid_hz)
        if n == 0:
            raise TouchstoneError("no data points")
        for name in ("s11", "s21", "s12", "s22"):
            if len(getattr(self, name)) != n:
                raise TouchstoneError(f"{name} has {len(getattr(self, name))} points, grid has {n}")
        for a, b in zip(self.freq_grid_hz, self.freq_grid_hz[1:]):
            if b <= a:
                raise NonMonotoneGrid(f"frequency grid not strictly ascending at {b} Hz")
        if not self.reference_impedance_ohms > 0:
            raise TouchstoneError(
                f"reference impedance must be positive, got {self.reference_impedance_ohms}"
            )

    @property
    def n_points(self) -> int:
        return len(self.freq_grid_hz)

    def at_frequency(self, f_hz: int) -> tuple[complex, complex, complex, complex]:
        """All four parameters at f_hz, linear in real/imag between knots."""
        grid = self.freq_grid_hz
        if f_hz < grid[0] or f_hz > grid[-1]:
            raise OutOfRange(
                f"{f_hz} Hz outside measured span [{grid[0]}, {grid[-1]}] Hz"
            )
        i = bisect.bisect_left(grid, f_hz)
        if grid[i] == f_hz:
            return (self.s11[i], self.s21[i], self.s12[i], self.s22[i])
        lo, hi = i - 1, i
        t = (f_hz - grid[lo]) / (grid[hi] - grid[lo])

        def lerp(vals):
            a, b = vals[lo], vals[hi]
            return complex(
                a.real + t * (b.real - a.real), a.imag + t * (b.imag - a.imag)
            )

        return (lerp(self.s11), lerp(self.s21), lerp(self.s12), lerp(self.s22))


def _parse_option_line(line: str, lineno: int) -> tuple[int, str, float]:
    """Return (freq exponent, format, reference ohms) from a '#' line."""
    tokens = line[1:].split()
    exponent = None
    fmt = None
    resistance = None
    saw_type = False
    i = 0
    while i < len(tokens):
        t = tokens[i].upper()
        if t in FREQ_UNITS:
            if exponent is not None:
                raise MalformedOptionLine("frequency unit given twice", lineno)
            exponent = FREQ_UNITS[t]
        elif t in FORMATS:
            if fmt is not None:
                raise MalformedOptionLine("format given twice", lineno)
            fmt = t
        elif t == "S":
            if saw_type:
                raise MalformedOptionLine("parameter type given twice", lineno)
            saw_type = True
        elif t in ("Y", "Z", "H", "G"):
            raise MalformedOptionLine(
                f"only S-parameters are supported, got type {t!r}", lineno
            )
        elif t == "R":
            if resistance is not None:
                raise MalformedOptionLine("reference resistance given twice", lineno)
            if i + 1 >= len(tokens):
                raise MalformedOptionLine("'R' with no resistance value", lineno)
            try:
                resistance = float(tokens[i + 1])
            except ValueError:
                raise MalformedOptionLine(
                    f"bad resistance value {tokens[i + 1]!r}", lineno
                ) from None
            if not resistance > 0:
                raise MalformedOptionLine(
                    f"reference resistance must be positive, got {resistance}", lineno
                )
            i += 1
        else:
            raise MalformedOptionLine(f"unrecognized token {tokens[i]!r}", lineno)
        i += 1
    return (
        exponent if exponent is not None else 9,
        fmt if fmt is not None else "MA",
        resistance if resistance is not None else 50.0,
    )


def _parse_freq(token: str, exponent: int, lineno: int) -> int:
    try:
        value = Decimal(token)
    except InvalidOperation:
        raise BadNumericField(f"bad frequency value {token!r}", lineno) from None
    scaled = value.scaleb(exponent)
    hz = scaled.to_integral_value()
    if hz != scaled:
        raise BadNumericField(
            f"frequency {token!r} is not an integer count of Hz", lineno
        )
    if hz < 0:
        raise BadNumericField(f"negative frequency {token!r}", lineno)
    return int(hz)


def _parse_pair(a: str, b: str, fmt: str, lineno: int) -> complex:
    try:
        x, y = float(a), float(b)
    except ValueError:
        raise BadNumericField(f"bad numeric field in pair ({a!r}, {b!r})", lineno) from None
    if not (math.isfinite(x) and math.isfinite(y)):
        raise BadNumericField(f"non-finite value in pair ({a!r}, {b!r})", lineno)
    if fmt == "RI":
        return complex(x, y)
    if fmt == "DB":
        x = 10.0 ** (x / 20.0)
    return cmath.rect(x, math.radians(y))


def parse_touchstone(text: str) -> TwoPortSParams:
    """Parse a version-1 2-port document."""
    option = None
    grid: list[int] = []
    cols: tuple[list[complex], ...] = ([], [], [], [])
    for lineno, raw in enumerate(text.splitlines(), start=1):
        cut = raw.find("!")
        line = (raw if cut < 0 else raw[:cut]).strip()
        if not line:
            continue
        if line.startswith("["):
            raise MalformedOptionLine(
                f"version-2 keyword {line.split()[0]!r}; only version 1 is supported",
                lineno,
            )
        if line.startswith("#"):
            if grid:
                raise MalformedOptionLine("option line after data rows", lineno)
            if option is not None:
                raise MalformedOptionLine("more than one option line", lineno)
            option = _parse_option_line(line, lineno)
            continue
        tokens = line.split()
        if len(tokens) != 9:
            raise WrongPortCount(
                f"2-port rows need 9 values (f and four pairs), got {len(tokens)}",
                lineno,
            )
        exponent, fmt, _ = option if option is not None else (9, "MA", 50.0)
        f_hz = _parse_freq(tokens[0], exponent, lineno)
        if grid and f_hz <= grid[-1]:
            raise NonMonotoneGrid(
                f"frequency {f_hz} Hz does not ascend past {grid[-1]} Hz", lineno
            )
        grid.append(f_hz)
        for k in range(4):
            cols[k].append(_parse_pair(tokens[1 + 2 * k], tokens[2 + 2 * k], fmt, lineno))
    if not grid:
        raise TouchstoneError("document contains no data rows")
    resistance = option[2] if option is not None else 50.0
    return TwoPortSParams(
        freq_grid_hz=tuple(grid),
        s11=tuple(cols[0]),
        s21=tuple(cols[1]),
        s12=tuple(cols[2]),
        s22=tuple(cols[3]),
        reference_impedance_ohms=resistance,
    )


def _format_freq(f_hz: int, exponent: int) -> str:
    return format(Decimal(f_hz).scaleb(-exponent), "f")


def _format_pair(c: complex, fmt: str) -> str:
    if fmt == "RI":
        return f"{c.real:.12e} {c.imag:.12e}"
    mag = abs(c)
    # math.atan2, unlike cmath.phase, never trips errno on subnormal parts
    deg = math.degrees(math.atan2(c.imag, c.real))
    if fmt == "DB":
        if mag == 0.0:
            raise ValueError("zero magnitude cannot be written in DB format")
        return f"{20.0 * math.log10(mag):.12e} {deg:.12e}"
    return f"{mag:.12e} {deg:.12e}"


def serialize_touchstone(
    sp: TwoPortSParams, unit: str = "GHz", fmt: str = "MA"
) -> str:
    """Write a version-1 document that parses back within 1e-9."""
    unit_key = unit.upper()
    if unit_key not in FREQ_UNITS:
        raise ValueError(f"unknown frequency unit {unit!r}")
    fmt = fmt.upper()
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    exponent = FREQ_UNITS[unit_key]
    unit_names = {"HZ": "Hz", "KHZ": "kHz", "MHZ": "MHz", "GHZ": "GHz"}
    lines = [
        f"! 2-port S-parameters, f in {unit_names[unit_key]}, S11 S21 S12 S22",
        f"# {unit_names[unit_key]} S {fmt} R {sp.reference_impedance_ohms:.12g}",
    ]
    for i, f_hz in enumerate(sp.freq_grid_hz):
        row = [_format_freq(f_hz, exponent)]
        for vals in (sp.s11, sp.s21, sp.s12, sp.s22):
            row.append(_format_pair(vals[i], fmt))
        lines.append(" ".join(row))
    return "\n".join(lines) + "\n"
