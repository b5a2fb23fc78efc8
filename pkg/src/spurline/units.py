"""Scalar conventions, tones, spectra, and spectral binning.

Conventions used across the package:

* Frequencies are exact integer hertz (Python ``int``, arbitrary precision).
  There is no floating-point frequency anywhere in the data model, so
  "lands exactly on" questions have exact answers.
* Powers are dBm floats, gains/losses are dB floats, relative levels are
  dBc floats.
* Phases are radians in ``[0, 2*pi)``.  Phase is carried along but only
  consumed when tones with identical origin are merged coherently.
* Tones below the amplitude floor (default -200 dBm) are never stored.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

# Documentation aliases; plain builtins at runtime.
FrequencyHz = int
PowerDbm = float
GainDb = float
PhaseRad = float

#: Default amplitude floor.  Far below every quantity of interest here
#: (bench-level signals stay above -120 dBm) so dropping at the floor is
#: numerically invisible; the CLI can override it via SPURLINE_FLOOR_DBM.
DEFAULT_FLOOR_DBM = -200.0

_TWO_PI = 2.0 * math.pi


class SummationMode(enum.Enum):
    """How tones with different origins are combined when they collide."""

    POWER_SUM = "power_sum"
    WORST_CASE = "worst_case"


# -----------------------------------------------------------------------------
# dB arithmetic
# -----------------------------------------------------------------------------

def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    """Inverse of dbm_to_watts.  Zero maps to -inf (below any floor)."""
    if watts < 0.0:
        raise ValueError(f"negative power: {watts} W")
    if watts == 0.0:
        return -math.inf
    return 10.0 * math.log10(watts) + 30.0


def db_to_ratio(db: float) -> float:
    """dB -> linear power ratio."""
    return 10.0 ** (db / 10.0)


def ratio_to_db(ratio: float) -> float:
    if ratio <= 0.0:
        raise ValueError(f"non-positive power ratio: {ratio}")
    return 10.0 * math.log10(ratio)


def normalize_phase(phase_rad: float) -> float:
    """Fold a finite phase into [0, 2*pi)."""
    p = math.fmod(phase_rad, _TWO_PI)
    if p < 0.0:
        p += _TWO_PI
    # fmod of a tiny negative can round up to exactly 2*pi
    if p >= _TWO_PI:
        p = 0.0
    return p


# -----------------------------------------------------------------------------
# Origins
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class OriginSignature:
    """Provenance of a tone: the source it came from plus the product path.

    ``product_path`` entries are (stage_id, n, m) with the signal-order n and
    LO-order m as generated at that stage; m is signed to distinguish sum
    (+m) from difference (-m) products.  An empty path denotes an unmodified
    stimulus tone.  Two tones are coherent-summable iff their signatures
    compare equal.
    """

    source_id: str
    product_path: tuple[tuple[str, int, int], ...] = ()

    def extended(self, stage_id: str, n: int, m: int) -> "OriginSignature":
        return OriginSignature(self.source_id, self.product_path + ((stage_id, n, m),))

    def token(self) -> str:
        """Compact, stable text form (used in CSV output and derived ids)."""
        parts = [self.source_id]
        parts.extend(f"{sid}:{n:+d}:{m:+d}" for sid, n, m in self.product_path)
        return "|".join(parts)

    def sort_key(self):
        return (self.source_id, self.product_path)

    @property
    def is_stimulus(self) -> bool:
        return not self.product_path


# -----------------------------------------------------------------------------
# Tones and spectra
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class Tone:
    """One spectral line: exact integer frequency, dBm power, phase, origin."""

    freq_hz: FrequencyHz
    power_dbm: PowerDbm
    phase_rad: PhaseRad = 0.0
    origin: OriginSignature = OriginSignature("stimulus")

    def __post_init__(self):
        if not isinstance(self.freq_hz, int) or isinstance(self.freq_hz, bool):
            raise TypeError(f"frequency must be an int (got {self.freq_hz!r})")
        if self.freq_hz < 0:
            raise ValueError(f"negative frequency: {self.freq_hz}")
        if not math.isfinite(self.power_dbm):
            raise ValueError(f"tone power must be finite (got {self.power_dbm!r})")
        if not math.isfinite(self.phase_rad):
            raise ValueError(f"tone phase must be finite (got {self.phase_rad!r})")
        object.__setattr__(self, "phase_rad", normalize_phase(self.phase_rad))

    def sort_key(self):
        return (self.freq_hz, self.power_dbm, self.phase_rad, self.origin.sort_key())


@dataclass(frozen=True)
class Spectrum:
    """Immutable, sorted collection of tones plus the binning tolerance.

    ``bin_tolerance_hz`` is the collision window used when this spectrum was
    binned: 0 Hz for exact planner-style use, 1 kHz for engine display output.
    Construct via :func:`bin_spectrum`; the raw constructor only checks
    ordering.
    """

    tones: tuple[Tone, ...] = ()
    bin_tolerance_hz: FrequencyHz = 0

    def __post_init__(self):
        if self.bin_tolerance_hz < 0:
            raise ValueError("bin tolerance must be >= 0")
        keys = [t.sort_key() for t in self.tones]
        if any(b < a for a, b in zip(keys, keys[1:])):
            raise ValueError("spectrum tones must be sorted")

    def __len__(self) -> int:
        return len(self.tones)

    def __iter__(self):
        return iter(self.tones)

    @property
    def is_empty(self) -> bool:
        return not self.tones

    def tone_near(self, freq_hz: int, within_hz: int | None = None) -> Tone | None:
        """Strongest tone within ``within_hz`` (default: bin tolerance) of freq."""
        win = self.bin_tolerance_hz if within_hz is None else within_hz
        best = None
        for t in self.tones:
            if abs(t.freq_hz - freq_hz) <= win:
                if best is None or t.power_dbm > best.power_dbm:
                    best = t
        return best

    def power_near(self, freq_hz: int, within_hz: int | None = None) -> float | None:
        t = self.tone_near(freq_hz, within_hz)
        return None if t is None else t.power_dbm

    def strongest(self) -> Tone | None:
        if not self.tones:
            return None
        return max(self.tones, key=lambda t: (t.power_dbm, -t.freq_hz))

    def total_power_dbm(self) -> float:
        return watts_to_dbm(sum(dbm_to_watts(t.power_dbm) for t in self.tones))


def _amplitude(t: Tone) -> complex:
    """Complex amplitude in sqrt-watt units (any fixed reference works)."""
    return cmath.rect(math.sqrt(dbm_to_watts(t.power_dbm)), t.phase_rad)


def _merge_same_origin(group: list[Tone]) -> tuple[float, float]:
    """Coherent complex-amplitude sum.  Returns (power_dbm, phase_rad)."""
    amp = 0j
    for t in group:
        amp += _amplitude(t)
    mag = abs(amp)
    if mag == 0.0:
        return -math.inf, 0.0
    return watts_to_dbm(mag * mag), normalize_phase(cmath.phase(amp))


def bin_spectrum(
    tones,
    bin_tolerance_hz: int,
    mode: SummationMode = SummationMode.POWER_SUM,
    floor_dbm: float = DEFAULT_FLOOR_DBM,
) -> Spectrum:
    """Collapse colliding tones into a canonical spectrum.

    Tones are sorted, then clustered: a tone joins the open cluster while its
    frequency is within ``bin_tolerance_hz`` of the cluster anchor (the lowest
    frequency in the cluster; no chaining).  Inside a cluster, tones with
    equal OriginSignature are summed coherently (complex amplitudes, so
    opposite phases may cancel below the floor).  Distinct origins are then
    combined per ``mode``: POWER_SUM adds linear powers, WORST_CASE adds
    voltage magnitudes.  The merged tone sits at the anchor frequency and
    keeps the phase/origin of the strongest coherent subgroup, which makes
    the operation idempotent and independent of input order.
    """
    if bin_tolerance_hz < 0:
        raise ValueError("bin tolerance must be >= 0")
    live = sorted((t for t in tones if t.power_dbm >= floor_dbm), key=Tone.sort_key)

    out: list[Tone] = []
    i = 0
    while i < len(live):
        anchor = live[i].freq_hz
        j = i
        while j < len(live) and live[j].freq_hz - anchor <= bin_tolerance_hz:
            j += 1
        cluster = live[i:j]
        i = j

        if len(cluster) == 1:
            out.append(cluster[0])
            continue

        by_origin: dict[OriginSignature, list[Tone]] = {}
        for t in cluster:
            by_origin.setdefault(t.origin, []).append(t)

        merged: list[Tone] = []
        for origin in sorted(by_origin, key=OriginSignature.sort_key):
            group = by_origin[origin]
            p_dbm, phase = _merge_same_origin(group)
            if p_dbm < floor_dbm:
                continue
            merged.append(Tone(anchor, p_dbm, phase, origin))

        if not merged:
            continue
        if len(merged) == 1:
            out.append(merged[0])
            continue

        rep = max(merged, key=lambda t: (t.power_dbm, t.phase_rad, t.origin.sort_key()))
        watts = [dbm_to_watts(t.power_dbm) for t in merged]
        if mode is SummationMode.POWER_SUM:
            total = watts_to_dbm(sum(watts))
        else:
            volts = sum(math.sqrt(w) for w in watts)
            total = watts_to_dbm(volts * volts)
        if total >= floor_dbm:
            out.append(Tone(anchor, total, rep.phase_rad, rep.origin))

    return Spectrum(tuple(sorted(out, key=Tone.sort_key)), bin_tolerance_hz)
