"""Component behavioral parameters and the chain container.

Every component is a frozen dataclass holding behavioral numbers only; the
math that consumes them lives in :mod:`spurline.engine`.  Defaults follow the
bench setup this package models and are calibration values, not datasheet
truths (see README).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

from .errors import InvariantViolation

# LO drive window used for validation warnings, dBm at the mixer LO port.
DEFAULT_LO_DRIVE_MIN_DBM = 13.0
DEFAULT_LO_DRIVE_MAX_DBM = 25.0


@dataclass(frozen=True)
class SourceSpec:
    """Tone source: chain stimulus or LO generator.

    ``num_tones=2`` emits a symmetric pair centered on ``freq_hz`` separated
    by ``spacing_hz`` (both halves at ``power_dbm``).  ``harmonics`` entries
    are (order, dBc) emitted at order*freq.
    """

    freq_hz: int
    power_dbm: float
    phase_rad: float = 0.0
    harmonics: tuple[tuple[int, float], ...] = ()
    num_tones: int = 1
    spacing_hz: int = 0

    def __post_init__(self):
        if self.freq_hz <= 0:
            raise InvariantViolation("freq", "source frequency must be > 0 Hz")
        if self.num_tones not in (1, 2):
            raise InvariantViolation("tones", "a source emits 1 or 2 tones")
        if self.num_tones == 2:
            if self.spacing_hz <= 0:
                raise InvariantViolation("spacing", "two-tone source needs spacing > 0")
            if self.spacing_hz % 2 != 0:
                raise InvariantViolation("spacing", "spacing must be an even number of Hz")
            if self.spacing_hz // 2 >= self.freq_hz:
                raise InvariantViolation("spacing", "spacing too wide for center frequency")
        elif self.spacing_hz != 0:
            raise InvariantViolation("spacing", "spacing given but tones = 1")
        for order, dbc in self.harmonics:
            if order < 2:
                raise InvariantViolation("harmonic", f"harmonic order must be >= 2 (got {order})")
            if dbc > 0:
                raise InvariantViolation("harmonic", f"harmonic level must be <= 0 dBc (got {dbc})")

    def tone_frequencies(self) -> tuple[int, ...]:
        if self.num_tones == 1:
            return (self.freq_hz,)
        half = self.spacing_hz // 2
        return (self.freq_hz - half, self.freq_hz + half)


@dataclass(frozen=True)
class DoublerSpec:
    """Leveled active frequency doubler.

    Output power is flat at ``p_max_dbm`` once the input reaches
    ``p_threshold_dbm``; below the knee it falls off at ``unleveled_slope``
    dB per dB of input deficit.  A residual of the input fundamental leaks
    through at ``fundamental_leakage_dbc`` relative to the doubled output.
    """

    p_max_dbm: float = 20.0
    p_threshold_dbm: float = -12.0
    unleveled_slope: float = 2.0
    fundamental_leakage_dbc: float = -30.0

    def __post_init__(self):
        if self.unleveled_slope <= 0:
            raise InvariantViolation("unleveled_slope", "slope must be > 0")
        if self.fundamental_leakage_dbc > 0:
            raise InvariantViolation("fundamental_leakage", "leakage must be <= 0 dBc")


def default_spur_table() -> dict[tuple[int, int], float]:
    """(n, m) -> dBc relative to the (1,1) product.

    The (1,2)/(1,3) levels are scenario calibrations chosen to reproduce the
    observed LO-harmonic spurs about 40 dB below the desired signal on the
    bench this models; they are not datasheet values.
    """
    return {(1, 1): 0.0, (1, 2): -40.0, (1, 3): -40.0}


@dataclass(frozen=True)
class MixerSpec:
    """Spur-table mixer: products at |n*f_sig +/- m*f_lo|.

    Spur powers are fixed dBc offsets from the (1,1) conversion at the
    operating LO drive.  Entries absent from the table sit at
    ``spur_floor_dbc``.  LO-to-RF and IF-to-RF isolation set the breakthrough
    and feedthrough terms; both are calibrations for this bench.
    """

    conversion_loss_db: float = 8.0
    spur_table: dict[tuple[int, int], float] = field(default_factory=default_spur_table)
    lo_to_rf_isolation_db: float = 25.0
    if_to_rf_isolation_db: float = 30.0
    n_max: int = 3
    m_max: int = 3
    spur_floor_dbc: float = -60.0
    lo_drive_min_dbm: float = DEFAULT_LO_DRIVE_MIN_DBM
    lo_drive_max_dbm: float = DEFAULT_LO_DRIVE_MAX_DBM

    def __post_init__(self):
        if self.conversion_loss_db < 0:
            raise InvariantViolation("conversion_loss", "conversion loss must be >= 0 dB")
        if self.n_max < 1 or self.m_max < 1:
            raise InvariantViolation("n_max", "order limits must be >= 1")
        if self.spur_floor_dbc > 0:
            raise InvariantViolation("spur_floor", "spur floor must be <= 0 dBc")
        if self.lo_drive_min_dbm > self.lo_drive_max_dbm:
            raise InvariantViolation("lo_drive", "drive window is empty")
        table = dict(self.spur_table)
        if (0, 0) in table:
            raise InvariantViolation("spur", "(0,0) is not a mixing product")
        if table.get((1, 1), 0.0) != 0.0:
            raise InvariantViolation("spur", "(1,1) must be 0 dBc by definition")
        table.setdefault((1, 1), 0.0)
        for (n, m), dbc in table.items():
            if n < 0 or m < 0:
                raise InvariantViolation("spur", f"orders must be >= 0 (got {(n, m)})")
            if (n, m) != (1, 1) and dbc > 0:
                raise InvariantViolation("spur", f"spur level must be <= 0 dBc (got {dbc} at {(n, m)})")
        object.__setattr__(self, "spur_table", table)

    def rejection_dbc(self, n: int, m: int) -> float:
        return self.spur_table.get((n, m), self.spur_floor_dbc)


@dataclass(frozen=True)
class FilterSpec:
    """Piecewise-linear attenuation mask: (freq_hz, attenuation_db) breakpoints.

    Attenuation between breakpoints is linear in dB against linear frequency;
    outside the breakpoint span it clamps to the nearest endpoint value.
    """

    breakpoints: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if not self.breakpoints:
            raise InvariantViolation("breakpoint", "a filter needs at least one breakpoint")
        freqs = [f for f, _ in self.breakpoints]
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise InvariantViolation("breakpoint", "breakpoint frequencies must be strictly increasing")
        for f, att in self.breakpoints:
            if f <= 0:
                raise InvariantViolation("breakpoint", "breakpoint frequency must be > 0 Hz")
            if att < 0:
                raise InvariantViolation("breakpoint", f"attenuation must be >= 0 dB (got {att})")

    def attenuation_db(self, freq_hz: int) -> float:
        pts = self.breakpoints
        if freq_hz <= pts[0][0]:
            return pts[0][1]
        if freq_hz >= pts[-1][0]:
            return pts[-1][1]
        for (f0, a0), (f1, a1) in zip(pts, pts[1:]):
            if f0 <= freq_hz <= f1:
                return a0 + (a1 - a0) * (freq_hz - f0) / (f1 - f0)
        raise AssertionError("unreachable")

    def min_attenuation_db(self) -> float:
        return min(att for _, att in self.breakpoints)


@dataclass(frozen=True)
class AmplifierSpec:
    """Memoryless third-order amplifier: flat gain, intermods set by OIP3.

    No compression: fundamentals follow gain exactly and intermod products
    follow their ideal 3:1 (and 5:1) slopes at all drive levels.  ``oip5_dbm``
    enables fifth-order 3f1-2f2 products.
    """

    gain_db: float
    oip3_dbm: float
    oip5_dbm: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.gain_db):
            raise InvariantViolation("gain", "gain must be finite")
        if not math.isfinite(self.oip3_dbm):
            raise InvariantViolation("oip3", "OIP3 must be finite")
        if self.oip5_dbm is not None and not math.isfinite(self.oip5_dbm):
            raise InvariantViolation("oip5", "OIP5 must be finite")

    @property
    def im5_enabled(self) -> bool:
        return self.oip5_dbm is not None


@dataclass(frozen=True)
class AttenuatorSpec:
    loss_db: float = 6.0

    def __post_init__(self):
        if self.loss_db < 0:
            raise InvariantViolation("loss", "attenuation must be >= 0 dB")


ComponentSpec = Union[
    SourceSpec, DoublerSpec, MixerSpec, FilterSpec, AmplifierSpec, AttenuatorSpec
]


class Stage(NamedTuple):
    stage_id: str
    spec: ComponentSpec


@dataclass(frozen=True)
class Chain:
    """Ordered stages plus probes and per-mixer LO routing.

    Probe positions are inter-stage indices: position p is the signal after
    the first p stages (0 = chain input, len(stages) = chain output).  Every
    mixer stage must have an LO sub-chain in ``lo_routing``; sub-chains may
    carry probes of their own (probe names are globally unique).
    """

    stages: tuple[Stage, ...]
    probes: dict[str, int] = field(default_factory=dict)
    lo_routing: dict[str, "Chain"] = field(default_factory=dict)

    def __post_init__(self):
        if not self.stages:
            raise InvariantViolation("stages", "a chain needs at least one stage")
        seen = set()
        for sid, _ in self.stages:
            if sid in seen:
                raise InvariantViolation("stages", f"duplicate stage id {sid!r}")
            seen.add(sid)
        for name, pos in self.probes.items():
            if not 0 <= pos <= len(self.stages):
                raise InvariantViolation("probe", f"probe {name!r} position {pos} out of range")
        mixer_ids = {sid for sid, spec in self.stages if isinstance(spec, MixerSpec)}
        for sid in mixer_ids:
            if sid not in self.lo_routing:
                raise InvariantViolation("lo", f"mixer {sid!r} has no LO sub-chain")
        for sid in self.lo_routing:
            if sid not in mixer_ids:
                raise InvariantViolation("lo", f"LO routing for non-mixer stage {sid!r}")

    def stage_index(self, stage_id: str) -> int:
        for i, (sid, _) in enumerate(self.stages):
            if sid == stage_id:
                return i
        raise KeyError(stage_id)

    def all_probe_names(self) -> list[str]:
        names = list(self.probes)
        for sub in self.lo_routing.values():
            names.extend(sub.all_probe_names())
        return names
