"""Post-processing: IP3 extraction, EVM budgets, leveling knee detection,
and LO breakthrough reporting.

All fits are plain least squares on dB quantities.  Nothing here touches the
engine; inputs are sweep tables, spur lists, or spectra.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .engine import SweepResult
from .errors import SpurlineError
from .units import Spectrum, SummationMode


class InsufficientPoints(SpurlineError):
    pass


class DegenerateFit(SpurlineError):
    """Fundamental and IM3 fit lines are parallel; no intercept exists."""


class NonNegativeSpur(SpurlineError):
    """A spur at or above the carrier has no meaningful EVM contribution."""


class DesiredToneMissing(SpurlineError):
    pass


# -----------------------------------------------------------------------------
# IP3
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class Ip3Fit:
    slope_fund: float
    slope_im3: float
    oip3_dbm: float
    iip3_dbm: float
    fit_residual_db: float

    @property
    def gain_db(self) -> float:
        return self.oip3_dbm - self.iip3_dbm

    def to_csv(self) -> str:
        return (
            "slope_fund,slope_im3,oip3_dbm,iip3_dbm,fit_residual_db\n"
            f"{self.slope_fund:.6f},{self.slope_im3:.6f},{self.oip3_dbm:.6f},"
            f"{self.iip3_dbm:.6f},{self.fit_residual_db:.6f}\n"
        )

    def to_report(self) -> str:
        return (
            f"OIP3 = {self.oip3_dbm:.2f} dBm\n"
            f"IIP3 = {self.iip3_dbm:.2f} dBm\n"
            f"SLOPE_FUND = {self.slope_fund:.3f}\n"
            f"SLOPE_IM3 = {self.slope_im3:.3f}\n"
            f"FIT_RESIDUAL_DB = {self.fit_residual_db:.4f}\n"
        )


def fit_ip3(sweep: SweepResult) -> Ip3Fit:
    """Least-squares lines through (pin, fund) and (pin, IM3); OIP3 at their
    intersection.

    The IM3 ordinate is the mean of the low/high products when both are
    present.  Two usable points suffice for an exact two-parameter line; the
    sweep contract normally provides many more.
    """
    pins, funds, im3s = [], [], []
    for r in sweep.rows:
        if r.fund_dbm is None:
            continue
        vals = [v for v in (r.im3_low_dbm, r.im3_high_dbm) if v is not None]
        if not vals:
            continue
        pins.append(r.pin_dbm)
        funds.append(r.fund_dbm)
        im3s.append(sum(vals) / len(vals))
    if len(pins) < 2:
        raise InsufficientPoints(
            f"IP3 fit needs at least 2 sweep points with fundamental and IM3 (got {len(pins)})"
        )
    x = np.asarray(pins)
    bf, af = np.polyfit(x, np.asarray(funds), 1)
    bi, ai = np.polyfit(x, np.asarray(im3s), 1)
    if abs(bf - bi) < 1e-9:
        raise DegenerateFit("fundamental and IM3 lines are parallel")
    pin_star = (af - ai) / (bi - bf)
    oip3 = bf * pin_star + af
    res_f = np.asarray(funds) - (bf * x + af)
    res_i = np.asarray(im3s) - (bi * x + ai)
    residual = float(np.sqrt(np.mean(np.concatenate([res_f, res_i]) ** 2)))
    return Ip3Fit(float(bf), float(bi), float(oip3), float(pin_star), residual)


# -----------------------------------------------------------------------------
# EVM
# -----------------------------------------------------------------------------

def evm_from_spurs(spur_levels_dbc, mode: SummationMode = SummationMode.POWER_SUM) -> float:
    """Error-vector magnitude (fraction of carrier) from spur levels in dBc.

    POWER_SUM combines contributions as root-sum-of-powers; WORST_CASE adds
    voltage magnitudes.  A single -40 dBc spur gives 0.01 (1%).
    """
    levels = list(spur_levels_dbc)
    for s in levels:
        if s >= 0:
            raise NonNegativeSpur(f"spur level must be < 0 dBc (got {s})")
    if not levels:
        return 0.0
    if mode is SummationMode.POWER_SUM:
        return math.sqrt(sum(10.0 ** (s / 10.0) for s in levels))
    return sum(10.0 ** (s / 20.0) for s in levels)


@dataclass(frozen=True)
class EvmBudget:
    contributions: tuple[tuple[str, float], ...]
    mode: SummationMode
    total_evm: float

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("label,level_dbc,evm_fraction\n")
        for label, dbc in self.contributions:
            buf.write(f"{label},{dbc:.6f},{evm_from_spurs([dbc], self.mode):.8f}\n")
        buf.write(f"total,,{self.total_evm:.8f}\n")
        return buf.getvalue()

    def to_report(self) -> str:
        lines = [f"EVM BUDGET mode={self.mode.name}"]
        for label, dbc in self.contributions:
            lines.append(
                f"  {label}: {dbc:.2f} dBc -> {100.0 * evm_from_spurs([dbc], self.mode):.4f}%"
            )
        lines.append(f"TOTAL_EVM: {100.0 * self.total_evm:.4f}%")
        return "\n".join(lines) + "\n"


def make_evm_budget(
    contributions, mode: SummationMode = SummationMode.POWER_SUM
) -> EvmBudget:
    """Budget from (label, dBc) pairs; total combined per ``mode``."""
    items = tuple((str(label), float(dbc)) for label, dbc in contributions)
    total = evm_from_spurs([dbc for _, dbc in items], mode)
    return EvmBudget(items, mode, total)


# -----------------------------------------------------------------------------
# leveling detection
# -----------------------------------------------------------------------------

def detect_leveling_threshold(curve, epsilon_db_per_db: float = 0.1) -> float:
    """Input power where a transfer curve goes flat.

    ``curve`` is (input_dbm, output_dbm) pairs with strictly increasing
    inputs.  Returns the smallest input such that every finite-difference
    slope at and above it is below ``epsilon``; a perfectly flat curve maps
    to the first input, a never-leveling curve to the last.
    """
    pts = [(float(a), float(b)) for a, b in curve]
    if len(pts) < 3:
        raise InsufficientPoints(f"leveling detection needs >= 3 points (got {len(pts)})")
    xs = [a for a, _ in pts]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise SpurlineError("leveling curve inputs must be strictly increasing")
    slopes = [
        (pts[i + 1][1] - pts[i][1]) / (pts[i + 1][0] - pts[i][0])
        for i in range(len(pts) - 1)
    ]
    last_steep = -1
    for i, s in enumerate(slopes):
        if s >= epsilon_db_per_db:
            last_steep = i
    return xs[last_steep + 1]


# -----------------------------------------------------------------------------
# LO breakthrough
# -----------------------------------------------------------------------------

#: Sentinel meaning the LO line fell below the amplitude floor entirely.
BELOW_FLOOR = -math.inf


def lo_breakthrough_report(
    spectrum: Spectrum, f_lo_hz: int, f_desired_hz: int
) -> float:
    """LO residual level relative to the desired tone, in dB.

    Returns ``BELOW_FLOOR`` (-inf) when no tone survives at the LO frequency.
    Raises DesiredToneMissing when the desired tone itself is absent, since a
    relative level is then meaningless.
    """
    desired = spectrum.tone_near(f_desired_hz)
    if desired is None:
        raise DesiredToneMissing(
            f"no tone within {spectrum.bin_tolerance_hz} Hz of {f_desired_hz} Hz"
        )
    lo = spectrum.tone_near(f_lo_hz)
    if lo is None:
        return BELOW_FLOOR
    return lo.power_dbm - desired.power_dbm
