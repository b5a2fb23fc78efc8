"""Tone-domain propagation through a conversion chain.

Each ``apply_*`` function maps spectra to spectra with exact integer output
frequencies; powers are dBm floats.  :func:`propagate` walks a chain,
recursively feeding each mixer from its LO sub-chain, and records every
inter-stage state so probes can be read back.  :func:`run_two_tone_sweep`
drives a chain with a two-tone stimulus over a power range and tabulates
fundamental/IM3/IM5/LO-residual levels at the output.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .components import (
    AmplifierSpec,
    AttenuatorSpec,
    Chain,
    DoublerSpec,
    FilterSpec,
    MixerSpec,
    SourceSpec,
)
from .errors import SpurlineError
from .units import (
    DEFAULT_FLOOR_DBM,
    OriginSignature,
    Spectrum,
    SummationMode,
    Tone,
    bin_spectrum,
    normalize_phase,
)

#: Display-oriented collision window for engine output; planner work uses 0.
ENGINE_BIN_TOLERANCE_HZ = 1_000

_TRIPLE_BEAT_DB = 10.0 * math.log10(4.0)  # third-order triple products sit 6.02 dB high


class MultiToneDoublerInput(SpurlineError):
    """Doubler driven with more than one tone; the model is single-carrier."""


class EmptyLoSpectrum(SpurlineError):
    """Mixer LO sub-chain delivered nothing above the floor."""


# -----------------------------------------------------------------------------
# per-component models
# -----------------------------------------------------------------------------

def doubler_output_dbm(p_in_dbm: float, spec: DoublerSpec) -> float:
    """Leveled output power: flat above the knee, sloped below it."""
    if p_in_dbm >= spec.p_threshold_dbm:
        return spec.p_max_dbm
    return spec.p_max_dbm - spec.unleveled_slope * (spec.p_threshold_dbm - p_in_dbm)


def apply_doubler(
    tone: Tone,
    spec: DoublerSpec,
    stage_id: str = "doubler",
    *,
    floor_dbm: float = DEFAULT_FLOOR_DBM,
    bin_tolerance_hz: int = ENGINE_BIN_TOLERANCE_HZ,
) -> Spectrum:
    """Doubled tone plus the leaked input fundamental."""
    p_out = doubler_output_dbm(tone.power_dbm, spec)
    out = [
        Tone(2 * tone.freq_hz, p_out, tone.phase_rad, tone.origin.extended(stage_id, 2, 0)),
    ]
    leak = p_out + spec.fundamental_leakage_dbc
    if leak >= floor_dbm:
        out.append(Tone(tone.freq_hz, leak, tone.phase_rad, tone.origin.extended(stage_id, 1, 0)))
    return bin_spectrum(out, bin_tolerance_hz, floor_dbm=floor_dbm)


def apply_mixer(
    in_spectrum: Spectrum,
    lo_spectrum: Spectrum,
    spec: MixerSpec,
    stage_id: str = "mixer",
    *,
    mode: SummationMode = SummationMode.POWER_SUM,
    floor_dbm: float = DEFAULT_FLOOR_DBM,
    desired_only: bool = False,
) -> Spectrum:
    """Spur-table mixing: products at |n*f_s +/- m*f_l| for every tone pair.

    Product power is s.power - conversion_loss + spur_table[(n, m)], with
    absent table entries at the spur floor.  When the LO spectrum carries
    more than one line (doubler leakage), products driven by a weaker LO line
    are scaled down by m times that line's deficit against the strongest LO
    line; single-line LOs reduce to the plain table formula.  LO-to-RF
    breakthrough and IF-to-RF feedthrough are added per tone.  Zero-frequency
    products are discarded.  ``desired_only`` restricts output to the (1, 1)
    conversion pair (used for filter-coverage validation).
    """
    if lo_spectrum.is_empty:
        raise EmptyLoSpectrum(f"mixer {stage_id!r} has no LO tone above the floor")
    lo_ref_dbm = max(t.power_dbm for t in lo_spectrum.tones)

    n_range = (1,) if desired_only else tuple(range(1, spec.n_max + 1))
    m_range = (1,) if desired_only else tuple(range(1, spec.m_max + 1))

    out: list[Tone] = []
    for s in in_spectrum.tones:
        for lo in lo_spectrum.tones:
            lo_deficit = lo.power_dbm - lo_ref_dbm
            for n in n_range:
                for m in m_range:
                    p = (
                        s.power_dbm
                        - spec.conversion_loss_db
                        + spec.rejection_dbc(n, m)
                        + m * lo_deficit
                    )
                    if p < floor_dbm:
                        continue
                    for sign in (1, -1):
                        f = abs(n * s.freq_hz + sign * m * lo.freq_hz)
                        if f == 0:
                            continue
                        out.append(Tone(f, p, s.phase_rad, s.origin.extended(stage_id, n, sign * m)))
    if not desired_only:
        for s in in_spectrum.tones:
            p = s.power_dbm - spec.if_to_rf_isolation_db
            if p >= floor_dbm:
                out.append(Tone(s.freq_hz, p, s.phase_rad, s.origin.extended(stage_id, 1, 0)))
        for lo in lo_spectrum.tones:
            p = lo.power_dbm - spec.lo_to_rf_isolation_db
            if p >= floor_dbm:
                out.append(Tone(lo.freq_hz, p, lo.phase_rad, lo.origin.extended(stage_id, 0, 1)))
    return bin_spectrum(out, in_spectrum.bin_tolerance_hz, mode, floor_dbm)


def apply_filter(
    spectrum: Spectrum,
    spec: FilterSpec,
    *,
    mode: SummationMode = SummationMode.POWER_SUM,
    floor_dbm: float = DEFAULT_FLOOR_DBM,
) -> Spectrum:
    out = []
    for t in spectrum.tones:
        p = t.power_dbm - spec.attenuation_db(t.freq_hz)
        if p >= floor_dbm:
            out.append(Tone(t.freq_hz, p, t.phase_rad, t.origin))
    return bin_spectrum(out, spectrum.bin_tolerance_hz, mode, floor_dbm)


def apply_attenuator(
    spectrum: Spectrum,
    spec: AttenuatorSpec,
    *,
    mode: SummationMode = SummationMode.POWER_SUM,
    floor_dbm: float = DEFAULT_FLOOR_DBM,
) -> Spectrum:
    out = []
    for t in spectrum.tones:
        p = t.power_dbm - spec.loss_db
        if p >= floor_dbm:
            out.append(Tone(t.freq_hz, p, t.phase_rad, t.origin))
    return bin_spectrum(out, spectrum.bin_tolerance_hz, mode, floor_dbm)


def _im_origin(stage_id: str, order: int, terms: list[tuple[int, Tone]]) -> OriginSignature:
    """Composite origin for an intermod product.

    The id embeds the parent origins and their coefficients, so products of
    the same combination (and only those) are mutually coherent.
    """
    inner = ",".join(f"{coeff:+d}*({t.origin.token()})" for coeff, t in terms)
    return OriginSignature(f"{stage_id}<{inner}>", ((stage_id, order, 0),))


def apply_amplifier(
    spectrum: Spectrum,
    spec: AmplifierSpec,
    stage_id: str = "amp",
    *,
    mode: SummationMode = SummationMode.POWER_SUM,
    floor_dbm: float = DEFAULT_FLOOR_DBM,
    include_intermods: bool = True,
    desired_only: bool = False,
) -> Spectrum:
    """Flat gain plus memoryless third-order (and optional fifth-order) products.

    Powers below are all output-referred.  For tones i != j the 2f_i - f_j
    product obeys P = 2*P_i + P_j - 2*OIP3, the unequal-tone generalization of
    the two-equal-tone law P_IM3 = 3*P_fund - 2*OIP3.  Triple products at
    f_i + f_j - f_k carry the trinomial multiplicity (amplitude factor 2, so
    +10*log10(4) dB).  With OIP5 set, 3f_i - 2f_j products follow
    P = 3*P_i + 2*P_j - 4*OIP5.  Products of products are not generated.
    """
    amplified = [
        Tone(t.freq_hz, t.power_dbm + spec.gain_db, t.phase_rad, t.origin)
        for t in spectrum.tones
    ]
    out = list(amplified)

    if include_intermods and not desired_only and len(amplified) >= 2:
        two_oip3 = 2.0 * spec.oip3_dbm
        for i, ti in enumerate(amplified):
            for j, tj in enumerate(amplified):
                if i == j:
                    continue
                f = abs(2 * ti.freq_hz - tj.freq_hz)
                if f == 0:
                    continue
                p = 2.0 * ti.power_dbm + tj.power_dbm - two_oip3
                if p < floor_dbm:
                    continue
                phase = normalize_phase(2.0 * ti.phase_rad - tj.phase_rad)
                out.append(Tone(f, p, phase, _im_origin(stage_id, 3, [(2, ti), (-1, tj)])))
        for i, ti in enumerate(amplified):
            for j in range(i + 1, len(amplified)):
                tj = amplified[j]
                for k, tk in enumerate(amplified):
                    if k == i or k == j:
                        continue
                    f = abs(ti.freq_hz + tj.freq_hz - tk.freq_hz)
                    if f == 0:
                        continue
                    p = ti.power_dbm + tj.power_dbm + tk.power_dbm - two_oip3 + _TRIPLE_BEAT_DB
                    if p < floor_dbm:
                        continue
                    phase = normalize_phase(ti.phase_rad + tj.phase_rad - tk.phase_rad)
                    out.append(Tone(f, p, phase,
                                    _im_origin(stage_id, 3, [(1, ti), (1, tj), (-1, tk)])))
        if spec.im5_enabled:
            four_oip5 = 4.0 * spec.oip5_dbm
            for i, ti in enumerate(amplified):
                for j, tj in enumerate(amplified):
                    if i == j:
                        continue
                    f = abs(3 * ti.freq_hz - 2 * tj.freq_hz)
                    if f == 0:
                        continue
                    p = 3.0 * ti.power_dbm + 2.0 * tj.power_dbm - four_oip5
                    if p < floor_dbm:
                        continue
                    phase = normalize_phase(3.0 * ti.phase_rad - 2.0 * tj.phase_rad)
                    out.append(Tone(f, p, phase, _im_origin(stage_id, 5, [(3, ti), (-2, tj)])))

    return bin_spectrum(out, spectrum.bin_tolerance_hz, mode, floor_dbm)


def source_tones(spec: SourceSpec, stage_id: str, floor_dbm: float) -> list[Tone]:
    tones = []
    freqs = spec.tone_frequencies()
    for idx, f in enumerate(freqs):
        sid = stage_id if len(freqs) == 1 else f"{stage_id}.{'lo' if idx == 0 else 'hi'}"
        tones.append(Tone(f, spec.power_dbm, spec.phase_rad, OriginSignature(sid)))
        for order, dbc in spec.harmonics:
            p = spec.power_dbm + dbc
            if p >= floor_dbm:
                tones.append(Tone(order * f, p, spec.phase_rad,
                                  OriginSignature(sid, ((stage_id, order, 0),))))
    return tones


# -----------------------------------------------------------------------------
# chain propagation
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class PropagationResult:
    """Final spectrum plus every recorded intermediate state.

    ``snapshots[i]`` is the root-chain signal after its first i stages;
    ``probe_spectra`` covers probes in the root chain and all LO sub-chains;
    ``lo_spectra`` maps each mixer stage id to the LO spectrum it was fed.
    """

    final: Spectrum
    stage_ids: tuple[str, ...]
    snapshots: tuple[Spectrum, ...]
    probe_spectra: dict[str, Spectrum]
    lo_spectra: dict[str, Spectrum]


def propagate(
    chain: Chain,
    stimulus: Spectrum | None = None,
    *,
    mode: SummationMode = SummationMode.POWER_SUM,
    floor_dbm: float = DEFAULT_FLOOR_DBM,
    bin_tolerance_hz: int = ENGINE_BIN_TOLERANCE_HZ,
    include_intermods: bool = True,
    desired_only: bool = False,
) -> PropagationResult:
    """Run the stimulus (or the chain's own sources) through every stage.

    Each mixer's LO sub-chain is propagated once per call; its probes are
    folded into the result.  ``desired_only`` keeps only fundamental source
    tones and (1,1) conversion products - the skeleton the chain is designed
    to carry - and is used by configuration validation.
    """
    probe_spectra: dict[str, Spectrum] = {}
    lo_spectra: dict[str, Spectrum] = {}

    def run(c: Chain, incoming: Spectrum) -> tuple[tuple[str, ...], tuple[Spectrum, ...]]:
        current = incoming
        snapshots = [current]
        for sid, spec in c.stages:
            if isinstance(spec, SourceSpec):
                fresh = source_tones(spec, sid, floor_dbm)
                if desired_only:
                    fresh = [t for t in fresh if t.origin.is_stimulus]
                current = bin_spectrum(
                    list(current.tones) + fresh, current.bin_tolerance_hz, mode, floor_dbm
                )
            elif isinstance(spec, DoublerSpec):
                if len(current) > 1:
                    raise MultiToneDoublerInput(
                        f"doubler {sid!r} fed {len(current)} tones; it accepts exactly one"
                    )
                if current.is_empty:
                    current = Spectrum((), current.bin_tolerance_hz)
                else:
                    current = apply_doubler(
                        current.tones[0], spec, sid,
                        floor_dbm=floor_dbm, bin_tolerance_hz=current.bin_tolerance_hz,
                    )
                    if desired_only and not current.is_empty:
                        doubled = max(current.tones, key=lambda t: t.power_dbm)
                        current = Spectrum((doubled,), current.bin_tolerance_hz)
            elif isinstance(spec, MixerSpec):
                sub = c.lo_routing[sid]
                _, sub_snaps = run(sub, Spectrum((), current.bin_tolerance_hz))
                lo_spectrum = sub_snaps[-1]
                lo_spectra[sid] = lo_spectrum
                current = apply_mixer(
                    current, lo_spectrum, spec, sid,
                    mode=mode, floor_dbm=floor_dbm, desired_only=desired_only,
                )
            elif isinstance(spec, FilterSpec):
                current = apply_filter(current, spec, mode=mode, floor_dbm=floor_dbm)
            elif isinstance(spec, AttenuatorSpec):
                current = apply_attenuator(current, spec, mode=mode, floor_dbm=floor_dbm)
            elif isinstance(spec, AmplifierSpec):
                current = apply_amplifier(
                    current, spec, sid,
                    mode=mode, floor_dbm=floor_dbm,
                    include_intermods=include_intermods, desired_only=desired_only,
                )
            else:
                raise TypeError(f"stage {sid!r}: unknown component {type(spec).__name__}")
            snapshots.append(current)
        for pname, pos in c.probes.items():
            probe_spectra[pname] = snapshots[pos]
        return tuple(s.stage_id for s in c.stages), tuple(snapshots)

    start = stimulus if stimulus is not None else Spectrum((), bin_tolerance_hz)
    stage_ids, snapshots = run(chain, start)
    return PropagationResult(snapshots[-1], stage_ids, snapshots, probe_spectra, lo_spectra)


# -----------------------------------------------------------------------------
# two-tone power sweep
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    pin_dbm: float
    fund_dbm: float | None
    im3_low_dbm: float | None
    im3_high_dbm: float | None
    im5_low_dbm: float | None
    im5_high_dbm: float | None
    lo_residual_dbm: float | None


SWEEP_CSV_HEADER = "pin_dbm,fund_dbm,im3_low_dbm,im3_high_dbm,im5_low_dbm,im5_high_dbm,lo_residual_dbm"


@dataclass(frozen=True)
class SweepResult:
    f_center_hz: int
    spacing_hz: int
    rows: tuple[SweepRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(SWEEP_CSV_HEADER + "\n")
        for r in self.rows:
            cells = [f"{r.pin_dbm:.6f}"]
            for v in (r.fund_dbm, r.im3_low_dbm, r.im3_high_dbm,
                      r.im5_low_dbm, r.im5_high_dbm, r.lo_residual_dbm):
                cells.append("" if v is None else f"{v:.6f}")
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()


def _strongest_pair(final: Spectrum, spacing_hz: int) -> tuple[Tone, Tone] | None:
    """The tone pair separated by exactly the stimulus spacing that carries
    the most power (by weaker member, then stronger, then lowest frequency)."""
    by_freq = {}
    for t in final.tones:
        prev = by_freq.get(t.freq_hz)
        if prev is None or t.power_dbm > prev.power_dbm:
            by_freq[t.freq_hz] = t
    best = None
    best_key = None
    for f, ta in sorted(by_freq.items()):
        tb = by_freq.get(f + spacing_hz)
        if tb is None:
            continue
        key = (min(ta.power_dbm, tb.power_dbm), max(ta.power_dbm, tb.power_dbm), -f)
        if best_key is None or key > best_key:
            best, best_key = (ta, tb), key
    return best


def sweep_row_from_result(
    result: PropagationResult, pin_dbm: float, spacing_hz: int
) -> SweepRow:
    final = result.final
    pair = _strongest_pair(final, spacing_hz)
    fund = im3l = im3h = im5l = im5h = None
    if pair is not None:
        ta, tb = pair
        fund = max(ta.power_dbm, tb.power_dbm)
        im3l = final.power_near(ta.freq_hz - spacing_hz)
        im3h = final.power_near(tb.freq_hz + spacing_hz)
        im5l = final.power_near(ta.freq_hz - 2 * spacing_hz)
        im5h = final.power_near(tb.freq_hz + 2 * spacing_hz)
    lo_residual = None
    if result.lo_spectra:
        last_mixer = [sid for sid in result.stage_ids if sid in result.lo_spectra]
        if last_mixer:
            lo = result.lo_spectra[last_mixer[-1]].strongest()
            if lo is not None:
                lo_residual = final.power_near(lo.freq_hz)
    return SweepRow(pin_dbm, fund, im3l, im3h, im5l, im5h, lo_residual)


def two_tone_stimulus(
    f_center_hz: int, spacing_hz: int, power_dbm: float,
    bin_tolerance_hz: int = ENGINE_BIN_TOLERANCE_HZ,
) -> Spectrum:
    if spacing_hz <= 0 or spacing_hz % 2 != 0:
        raise SpurlineError(f"two-tone spacing must be a positive even number of Hz (got {spacing_hz})")
    half = spacing_hz // 2
    if half >= f_center_hz:
        raise SpurlineError("two-tone spacing too wide for the center frequency")
    return bin_spectrum(
        [
            Tone(f_center_hz - half, power_dbm, 0.0, OriginSignature("tt.lo")),
            Tone(f_center_hz + half, power_dbm, 0.0, OriginSignature("tt.hi")),
        ],
        bin_tolerance_hz,
    )


def run_two_tone_sweep(
    chain: Chain,
    f_center_hz: int,
    spacing_hz: int,
    p_start_dbm: float,
    p_stop_dbm: float,
    p_step_db: float,
    *,
    mode: SummationMode = SummationMode.POWER_SUM,
    floor_dbm: float = DEFAULT_FLOOR_DBM,
    threads: int = 1,
) -> SweepResult:
    """Two-tone stimulus power sweep; one row per input level.

    ``p_start == p_stop`` yields a single row.  Rows are keyed and ordered by
    input power, so results are identical for any thread count.
    """
    if p_step_db <= 0:
        raise SpurlineError(f"sweep step must be > 0 dB (got {p_step_db})")
    if p_start_dbm > p_stop_dbm:
        raise SpurlineError("sweep start must be <= stop")
    if any(isinstance(spec, SourceSpec) for _, spec in chain.stages):
        raise SpurlineError(
            "two-tone sweeps need a source-free chain; the stimulus is injected externally"
        )

    points = []
    i = 0
    while True:
        p = p_start_dbm + i * p_step_db
        if p > p_stop_dbm + 1e-9:
            break
        points.append(p)
        i += 1

    def one(pin: float) -> SweepRow:
        stim = two_tone_stimulus(f_center_hz, spacing_hz, pin)
        result = propagate(chain, stim, mode=mode, floor_dbm=floor_dbm)
        return sweep_row_from_result(result, pin, spacing_hz)

    if threads > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = tuple(pool.map(one, points))
    else:
        rows = tuple(one(p) for p in points)
    return SweepResult(f_center_hz, spacing_hz, rows)


# -----------------------------------------------------------------------------
# spectrum CSV (simulate output)
# -----------------------------------------------------------------------------

SPECTRUM_CSV_HEADER = "freq_hz,power_dbm,phase_rad,origin"


def spectrum_to_csv(spectrum: Spectrum) -> str:
    buf = io.StringIO()
    buf.write(SPECTRUM_CSV_HEADER + "\n")
    for t in spectrum.tones:
        buf.write(f"{t.freq_hz},{t.power_dbm:.6f},{t.phase_rad:.9f},{t.origin.token()}\n")
    return buf.getvalue()
