"""Antenna-coupling datasets and the 2x2 MIMO channel matrix.

A coupling campaign is one .s2p file per (separation, polarization)
listed in a manifest CSV (``file,separation_mm,polarization``); s21 is
the antenna-to-antenna coupling.  Queries interpolate the grid in
frequency first, then in separation, real and imaginary parts
independently, so every measured knot reproduces exactly.

The channel matrix is the symmetric two-element model
H = g*[[1, c], [c, 1]] with a scalar power-transfer factor
sqrt(1-|gamma|^2) per mismatched port; full signal-flow-graph
cascading is out of scope.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvariantViolation, SpurlineError
from .touchstone import OutOfRange, TwoPortSParams, parse_touchstone

POLARIZATIONS = ("co", "cross")
MANIFEST_HEADER = "file,separation_mm,polarization"
COUPLING_CSV_HEADER = "separation_mm,pol,s21_db,s11_db"


class ManifestError(SpurlineError):
    """Coupling manifest is malformed or references unusable files."""


@dataclass(frozen=True)
class CouplingRecord:
    separation_mm: float
    polarization: str
    sparams: TwoPortSParams

    def __post_init__(self):
        if self.polarization not in POLARIZATIONS:
            raise InvariantViolation(
                "polarization", f"must be one of {POLARIZATIONS}, got {self.polarization!r}"
            )
        if not (math.isfinite(self.separation_mm) and self.separation_mm > 0):
            raise InvariantViolation(
                "separation_mm", f"must be positive, got {self.separation_mm}"
            )


@dataclass(frozen=True)
class CouplingDataset:
    records: tuple[CouplingRecord, ...]

    def __post_init__(self):
        if not self.records:
            raise InvariantViolation("records", "dataset is empty")
        for pol in POLARIZATIONS:
            seps = [r.separation_mm for r in self.records if r.polarization == pol]
            for a, b in zip(seps, seps[1:]):
                if b <= a:
                    raise InvariantViolation(
                        "records",
                        f"{pol} separations must be strictly increasing, got {a} then {b}",
                    )

    def for_polarization(self, pol: str) -> tuple[CouplingRecord, ...]:
        return tuple(r for r in self.records if r.polarization == pol)

    def separations_mm(self, pol: str) -> tuple[float, ...]:
        return tuple(r.separation_mm for r in self.for_polarization(pol))


def load_coupling_dataset(manifest_path) -> CouplingDataset:
    """Read the manifest CSV and every .s2p it names (paths are relative)."""
    path = Path(manifest_path)
    lines = path.read_text(encoding="utf-8").splitlines()
    rows = [ln.strip() for ln in lines if ln.strip()]
    if not rows or rows[0] != MANIFEST_HEADER:
        raise ManifestError(
            f"manifest must start with header {MANIFEST_HEADER!r}"
        )
    records = []
    for i, row in enumerate(rows[1:], start=2):
        parts = [p.strip() for p in row.split(",")]
        if len(parts) != 3:
            raise ManifestError(f"manifest line {i}: expected 3 columns, got {len(parts)}")
        fname, sep_txt, pol = parts
        try:
            sep = float(sep_txt)
        except ValueError:
            raise ManifestError(f"manifest line {i}: bad separation {sep_txt!r}") from None
        pol = pol.lower()
        if pol not in POLARIZATIONS:
            raise ManifestError(f"manifest line {i}: bad polarization {pol!r}")
        sp = parse_touchstone((path.parent / fname).read_text(encoding="utf-8"))
        records.append(CouplingRecord(sep, pol, sp))
    records.sort(key=lambda r: (r.polarization, r.separation_mm))
    return CouplingDataset(tuple(records))


def coupling_at(
    dataset: CouplingDataset, f_hz: int, separation_mm: float, pol: str = "co"
) -> complex:
    """s21 at (f, separation): frequency interpolation, then separation."""
    recs = dataset.for_polarization(pol)
    if not recs:
        raise OutOfRange(f"dataset has no {pol!r} records")
    seps = [r.separation_mm for r in recs]
    if separation_mm < seps[0] or separation_mm > seps[-1]:
        raise OutOfRange(
            f"separation {separation_mm} mm outside measured span "
            f"[{seps[0]}, {seps[-1]}] mm"
        )
    i = bisect.bisect_left(seps, separation_mm)
    if i < len(seps) and seps[i] == separation_mm:
        return recs[i].sparams.at_frequency(f_hz)[1]
    lo, hi = i - 1, i
    a = recs[lo].sparams.at_frequency(f_hz)[1]
    b = recs[hi].sparams.at_frequency(f_hz)[1]
    t = (separation_mm - seps[lo]) / (seps[hi] - seps[lo])
    return complex(a.real + t * (b.real - a.real), a.imag + t * (b.imag - a.imag))


def coupling_report_csv(dataset: CouplingDataset, f_hz: int) -> str:
    """Per-record coupling and return loss at one frequency."""
    lines = [COUPLING_CSV_HEADER]
    for r in dataset.records:
        s11, s21, _, _ = r.sparams.at_frequency(f_hz)
        s21_db = 20.0 * math.log10(abs(s21)) if abs(s21) > 0 else -math.inf
        s11_db = 20.0 * math.log10(abs(s11)) if abs(s11) > 0 else -math.inf
        lines.append(
            f"{format(r.separation_mm, 'g')},{r.polarization},"
            f"{s21_db:.6f},{s11_db:.6f}"
        )
    return "\n".join(lines) + "\n"


# -----------------------------------------------------------------------------
# channel matrix
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class ChannelMatrix2x2:
    h11: complex
    h12: complex
    h21: complex
    h22: complex
    condition_number: float

    def as_array(self) -> np.ndarray:
        return np.array([[self.h11, self.h12], [self.h21, self.h22]], dtype=complex)


def build_channel_matrix(
    direct_gain: complex,
    coupling: complex,
    mismatch_tx: complex = 0j,
    mismatch_rx: complex = 0j,
) -> ChannelMatrix2x2:
    """Assemble H = g*[[1, c], [c, 1]] with per-port mismatch factors."""
    if abs(coupling) >= 1:
        raise InvariantViolation("coupling", f"|c| must be < 1, got {abs(coupling)}")
    for name, gamma in (("mismatch_tx", mismatch_tx), ("mismatch_rx", mismatch_rx)):
        if abs(gamma) >= 1:
            raise InvariantViolation(name, f"|reflection| must be < 1, got {abs(gamma)}")
    if direct_gain == 0:
        raise InvariantViolation("direct_gain", "must be nonzero")
    scale = math.sqrt(1.0 - abs(mismatch_tx) ** 2) * math.sqrt(1.0 - abs(mismatch_rx) ** 2)
    g = complex(direct_gain) * scale
    c = complex(coupling)
    h = np.array([[g, g * c], [g * c, g]], dtype=complex)
    singular = np.linalg.svd(h, compute_uv=False)
    cond = math.inf if singular[1] == 0 else float(singular[0] / singular[1])
    return ChannelMatrix2x2(
        h11=complex(h[0, 0]),
        h12=complex(h[0, 1]),
        h21=complex(h[1, 0]),
        h22=complex(h[1, 1]),
        condition_number=cond,
    )


def channel_from_coupling(
    dataset: CouplingDataset,
    f_hz: int,
    separation_mm: float,
    direct_gain: complex = 1.0 + 0j,
    pol: str = "co",
    mismatch_tx: complex = 0j,
    mismatch_rx: complex = 0j,
) -> ChannelMatrix2x2:
    c = coupling_at(dataset, f_hz, separation_mm, pol)
    return build_channel_matrix(direct_gain, c, mismatch_tx, mismatch_rx)
