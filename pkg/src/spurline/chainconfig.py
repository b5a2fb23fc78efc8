"""Scenario file format: parse, serialize, validate.

The format is INI-flavored and hand-editable::

    # comment (also allowed inline after a value)
    [source if]
    freq = 5 GHz
    power = -10 dBm
    tones = 2
    spacing = 10 MHz

    [mixer mix1]
    conversion_loss = 8 dB
    lo = lo_path
    spur 1 2 = -40 dBc

    [chain main]
    stages = if -> mix1
    probe 2 = after mix1

Rules: ``[kind name]`` headers, one ``key = value`` per line, UTF-8,
case-sensitive keys and names, unknown kinds/keys are errors (fail-closed).
Frequencies take Hz/kHz/MHz/GHz suffixes and must resolve to an exact integer
number of hertz (parsed as decimals, never floats).  Levels take an optional
matching suffix (dBm, dB, dBc).  The root chain is the block named
``[chain main]``; every mixer references its LO sub-chain block by name via
``lo =``.  Probes may sit in any chain; names are globally unique.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

from .components import (
    AmplifierSpec,
    AttenuatorSpec,
    Chain,
    ComponentSpec,
    DoublerSpec,
    FilterSpec,
    MixerSpec,
    SourceSpec,
    Stage,
)
from .errors import (
    ConfigError,
    ConfigSyntaxError,
    DanglingLoReference,
    InvariantViolation,
    UnknownComponentKind,
)

_FREQ_UNITS = {"Hz": 1, "kHz": 10**3, "MHz": 10**6, "GHz": 10**9}

_HEADER_RE = re.compile(r"^\[\s*([A-Za-z_][\w.-]*)(?:\s+([A-Za-z_][\w.-]*))?\s*\]$")
_NAME_RE = re.compile(r"^[A-Za-z_][\w.-]*$")


# -----------------------------------------------------------------------------
# value grammar
# -----------------------------------------------------------------------------

def parse_frequency(text: str, field_name: str = "frequency") -> int:
    """Exact integer hertz from a decimal plus unit; floats never touched."""
    parts = text.split()
    if len(parts) == 1:
        num, unit = parts[0], "Hz"
    elif len(parts) == 2:
        num, unit = parts
    else:
        raise InvariantViolation(field_name, f"cannot parse frequency {text!r}")
    if unit not in _FREQ_UNITS:
        raise InvariantViolation(field_name, f"unknown frequency unit {unit!r}")
    try:
        value = Decimal(num)
    except InvalidOperation:
        raise InvariantViolation(field_name, f"bad number {num!r}") from None
    hz = value * _FREQ_UNITS[unit]
    if hz != hz.to_integral_value():
        raise InvariantViolation(field_name, f"{text!r} is not an integer number of hertz")
    if hz < 0:
        raise InvariantViolation(field_name, "frequency must be >= 0")
    return int(hz)


def _number_with_suffix(text: str, field_name: str, allowed: tuple[str, ...]) -> float:
    parts = text.split()
    if len(parts) == 2:
        num, suffix = parts
        if suffix not in allowed:
            raise InvariantViolation(
                field_name, f"unit {suffix!r} not valid here (expected {' or '.join(allowed) or 'no unit'})"
            )
    elif len(parts) == 1:
        num = parts[0]
    else:
        raise InvariantViolation(field_name, f"cannot parse value {text!r}")
    try:
        return float(num)
    except ValueError:
        raise InvariantViolation(field_name, f"bad number {num!r}") from None


def parse_dbm(text: str, field_name: str) -> float:
    return _number_with_suffix(text, field_name, ("dBm",))


def parse_db(text: str, field_name: str) -> float:
    return _number_with_suffix(text, field_name, ("dB",))


def parse_dbc(text: str, field_name: str) -> float:
    return _number_with_suffix(text, field_name, ("dBc",))


def parse_ratio(text: str, field_name: str) -> float:
    return _number_with_suffix(text, field_name, ())


def parse_int_value(text: str, field_name: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise InvariantViolation(field_name, f"bad integer {text!r}") from None


def parse_phase(text: str, field_name: str) -> float:
    parts = text.split()
    if len(parts) == 2 and parts[1] == "deg":
        return math.radians(float(parts[0]))
    return _number_with_suffix(text, field_name, ("rad",))


# -----------------------------------------------------------------------------
# raw block scan
# -----------------------------------------------------------------------------

@dataclass
class RawBlock:
    kind: str
    name: str
    line: int
    items: list[tuple[str, str, int]] = field(default_factory=list)


def parse_raw_blocks(text: str) -> list[RawBlock]:
    blocks: list[RawBlock] = []
    current: RawBlock | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        cut = raw.find("#")
        line = (raw if cut < 0 else raw[:cut]).strip()
        if not line:
            continue
        if line.startswith("["):
            m = _HEADER_RE.match(line)
            if not m:
                raise ConfigSyntaxError(f"malformed block header {line!r}", lineno)
            kind, name = m.group(1), m.group(2) or m.group(1)
            current = RawBlock(kind, name, lineno)
            blocks.append(current)
            continue
        if "=" not in line:
            raise ConfigSyntaxError(f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ConfigSyntaxError("key outside of any [block]", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigSyntaxError("empty key", lineno, raw.index("=") + 1)
        if not value:
            raise ConfigSyntaxError(f"empty value for key {key!r}", lineno, len(raw))
        current.items.append((key, value, lineno))
    return blocks


def apply_overrides(blocks: list[RawBlock], overrides: list[str]) -> None:
    """Apply ``block.key=value`` settings in place (CLI --set)."""
    by_name = {b.name: b for b in blocks}
    for setting in overrides:
        target, eq, value = setting.partition("=")
        if not eq or not value.strip():
            raise ConfigError(f"override must look like block.key=value (got {setting!r})")
        name, dot, key = target.partition(".")
        name = name.strip()
        key = key.strip()
        if not dot or not key:
            raise ConfigError(f"override key must be block.key (got {target!r})")
        block = by_name.get(name)
        if block is None:
            raise ConfigError(f"override names unknown block {name!r}")
        value = value.strip()
        replaced = False
        for i, (k, _, ln) in enumerate(block.items):
            if k == key:
                block.items[i] = (k, value, ln)
                replaced = True
                break
        if not replaced:
            block.items.append((key, value, block.line))


# -----------------------------------------------------------------------------
# component builders
# -----------------------------------------------------------------------------

class _Items:
    """Fail-closed key consumption for one block."""

    def __init__(self, block: RawBlock):
        self.block = block
        self.pending = list(block.items)

    def take(self, key: str) -> str | None:
        for i, (k, v, _) in enumerate(self.pending):
            if k == key:
                for k2, _, ln in self.pending[i + 1 :]:
                    if k2 == key:
                        raise ConfigSyntaxError(f"duplicate key {key!r} in [{self.block.kind} {self.block.name}]", ln)
                del self.pending[i]
                return v
        return None

    def take_all(self, key: str) -> list[str]:
        out = [v for k, v, _ in self.pending if k == key]
        self.pending = [(k, v, ln) for k, v, ln in self.pending if k != key]
        return out

    def take_matching(self, pattern: re.Pattern) -> list[tuple[re.Match, str, int]]:
        out = []
        rest = []
        for k, v, ln in self.pending:
            m = pattern.match(k)
            if m:
                out.append((m, v, ln))
            else:
                rest.append((k, v, ln))
        self.pending = rest
        return out

    def finish(self):
        if self.pending:
            key, _, ln = self.pending[0]
            raise ConfigSyntaxError(
                f"unknown key {key!r} for [{self.block.kind} {self.block.name}]", ln
            )


_SPUR_KEY = re.compile(r"^spur\s+(\d+)\s+(\d+)$")
_HARMONIC_KEY = re.compile(r"^harmonic\s+(\d+)$")
_PROBE_KEY = re.compile(r"^probe\s+([\w.-]+)$")


def _field(block: RawBlock, key: str) -> str:
    return f"[{block.kind} {block.name}] {key}"


def _build_source(block: RawBlock) -> SourceSpec:
    it = _Items(block)
    freq = it.take("freq")
    power = it.take("power")
    if freq is None or power is None:
        raise InvariantViolation(_field(block, "freq/power"), "source needs freq and power")
    phase = it.take("phase")
    tones = it.take("tones")
    spacing = it.take("spacing")
    harmonics = []
    for m, v, _ in it.take_matching(_HARMONIC_KEY):
        harmonics.append((int(m.group(1)), parse_dbc(v, _field(block, m.group(0)))))
    it.finish()
    return SourceSpec(
        freq_hz=parse_frequency(freq, _field(block, "freq")),
        power_dbm=parse_dbm(power, _field(block, "power")),
        phase_rad=parse_phase(phase, _field(block, "phase")) if phase else 0.0,
        harmonics=tuple(sorted(harmonics)),
        num_tones=parse_int_value(tones, _field(block, "tones")) if tones else 1,
        spacing_hz=parse_frequency(spacing, _field(block, "spacing")) if spacing else 0,
    )


def _build_doubler(block: RawBlock) -> DoublerSpec:
    it = _Items(block)
    kwargs = {}
    v = it.take("p_max")
    if v is not None:
        kwargs["p_max_dbm"] = parse_dbm(v, _field(block, "p_max"))
    v = it.take("p_threshold")
    if v is not None:
        kwargs["p_threshold_dbm"] = parse_dbm(v, _field(block, "p_threshold"))
    v = it.take("unleveled_slope")
    if v is not None:
        kwargs["unleveled_slope"] = parse_ratio(v, _field(block, "unleveled_slope"))
    v = it.take("fundamental_leakage")
    if v is not None:
        kwargs["fundamental_leakage_dbc"] = parse_dbc(v, _field(block, "fundamental_leakage"))
    it.finish()
    return DoublerSpec(**kwargs)


def _build_mixer(block: RawBlock) -> tuple[MixerSpec, str | None]:
    it = _Items(block)
    lo_name = it.take("lo")
    kwargs = {}
    scalar = {
        "conversion_loss": ("conversion_loss_db", parse_db),
        "lo_to_rf_isolation": ("lo_to_rf_isolation_db", parse_db),
        "if_to_rf_isolation": ("if_to_rf_isolation_db", parse_db),
        "spur_floor": ("spur_floor_dbc", parse_dbc),
        "lo_drive_min": ("lo_drive_min_dbm", parse_dbm),
        "lo_drive_max": ("lo_drive_max_dbm", parse_dbm),
    }
    for key, (attr, parser) in scalar.items():
        v = it.take(key)
        if v is not None:
            kwargs[attr] = parser(v, _field(block, key))
    for key in ("n_max", "m_max"):
        v = it.take(key)
        if v is not None:
            kwargs[key] = parse_int_value(v, _field(block, key))
    spurs = it.take_matching(_SPUR_KEY)
    base = MixerSpec(**kwargs)
    if spurs:
        table = dict(base.spur_table)
        for m, v, _ in spurs:
            n, mm = int(m.group(1)), int(m.group(2))
            table[(n, mm)] = parse_dbc(v, _field(block, m.group(0)))
        base = MixerSpec(**{**kwargs, "spur_table": table})
    it.finish()
    return base, lo_name


def _build_filter(block: RawBlock) -> FilterSpec:
    it = _Items(block)
    points = []
    for v in it.take_all("breakpoint"):
        fld = _field(block, "breakpoint")
        left, comma, right = v.partition(",")
        if not comma:
            raise InvariantViolation(fld, f"breakpoint needs 'freq, attenuation' (got {v!r})")
        points.append((parse_frequency(left.strip(), fld), parse_db(right.strip(), fld)))
    it.finish()
    if not points:
        raise InvariantViolation(_field(block, "breakpoint"), "filter needs at least one breakpoint")
    return FilterSpec(breakpoints=tuple(points))


def _build_amplifier(block: RawBlock) -> AmplifierSpec:
    it = _Items(block)
    gain = it.take("gain")
    oip3 = it.take("oip3")
    if gain is None or oip3 is None:
        raise InvariantViolation(_field(block, "gain/oip3"), "amplifier needs gain and oip3")
    oip5 = it.take("oip5")
    it.finish()
    return AmplifierSpec(
        gain_db=parse_db(gain, _field(block, "gain")),
        oip3_dbm=parse_dbm(oip3, _field(block, "oip3")),
        oip5_dbm=parse_dbm(oip5, _field(block, "oip5")) if oip5 else None,
    )


def _build_attenuator(block: RawBlock) -> AttenuatorSpec:
    it = _Items(block)
    v = it.take("loss")
    it.finish()
    return AttenuatorSpec(loss_db=parse_db(v, _field(block, "loss"))) if v else AttenuatorSpec()


_COMPONENT_BUILDERS = {
    "source": _build_source,
    "doubler": _build_doubler,
    "filter": _build_filter,
    "amplifier": _build_amplifier,
    "attenuator": _build_attenuator,
}

_KNOWN_KINDS = set(_COMPONENT_BUILDERS) | {"mixer", "chain"}


# -----------------------------------------------------------------------------
# chain assembly
# -----------------------------------------------------------------------------

def _parse_chain_block(block: RawBlock) -> tuple[list[str], dict[str, tuple[str, str]]]:
    it = _Items(block)
    stages_value = it.take("stages")
    if stages_value is None:
        raise InvariantViolation(_field(block, "stages"), "chain needs a stages list")
    stage_names = [s.strip() for s in stages_value.split("->")]
    if any(not _NAME_RE.match(s) for s in stage_names):
        raise InvariantViolation(_field(block, "stages"), f"bad stages list {stages_value!r}")
    probes: dict[str, tuple[str, str]] = {}
    for m, v, ln in it.take_matching(_PROBE_KEY):
        pname = m.group(1)
        if pname in probes:
            raise ConfigSyntaxError(f"duplicate probe {pname!r}", ln)
        words = v.split()
        if v in ("input", "output"):
            probes[pname] = (v, "")
        elif len(words) == 2 and words[0] in ("after", "before"):
            probes[pname] = (words[0], words[1])
        else:
            raise InvariantViolation(_field(block, m.group(0)), f"bad probe position {v!r}")
    it.finish()
    return stage_names, probes


class _Assembler:
    def __init__(self, blocks: list[RawBlock]):
        self.by_name: dict[str, RawBlock] = {}
        for b in blocks:
            if b.kind not in _KNOWN_KINDS:
                raise UnknownComponentKind(f"line {b.line}: unknown component kind {b.kind!r}")
            if b.name in self.by_name:
                raise ConfigSyntaxError(f"duplicate block name {b.name!r}", b.line)
            self.by_name[b.name] = b
        self.used_components: set[str] = set()
        self.used_chains: set[str] = set()
        self.probe_names: set[str] = set()
        self.building: list[str] = []

    def build_chain(self, name: str) -> Chain:
        block = self.by_name.get(name)
        if block is None or block.kind != "chain":
            raise DanglingLoReference(f"no [chain {name}] block")
        if name in self.building:
            raise InvariantViolation("lo", f"LO routing cycle through chain {name!r}")
        if name in self.used_chains:
            raise InvariantViolation("stages", f"chain {name!r} referenced more than once")
        self.used_chains.add(name)
        self.building.append(name)
        stage_names, probe_defs = _parse_chain_block(block)

        stages: list[Stage] = []
        lo_routing: dict[str, Chain] = {}
        for sname in stage_names:
            sblock = self.by_name.get(sname)
            if sblock is None:
                raise InvariantViolation("stages", f"chain {name!r} references undefined block {sname!r}")
            if sblock.kind == "chain":
                raise InvariantViolation("stages", f"chain {name!r} cannot nest chain {sname!r} as a stage")
            if sname in self.used_components:
                raise InvariantViolation("stages", f"component {sname!r} used more than once")
            self.used_components.add(sname)
            if sblock.kind == "mixer":
                spec, lo_name = _build_mixer(sblock)
                if lo_name is None:
                    raise DanglingLoReference(f"mixer {sname!r} has no 'lo =' sub-chain reference")
                lo_routing[sname] = self.build_chain(lo_name)
                stages.append(Stage(sname, spec))
            else:
                stages.append(Stage(sname, _COMPONENT_BUILDERS[sblock.kind](sblock)))

        probes: dict[str, int] = {}
        ids = [s.stage_id for s in stages]
        for pname, (where, target) in probe_defs.items():
            if pname in self.probe_names:
                raise InvariantViolation("probe", f"probe name {pname!r} used in more than one chain")
            self.probe_names.add(pname)
            if where == "input":
                probes[pname] = 0
            elif where == "output":
                probes[pname] = len(stages)
            else:
                if target not in ids:
                    raise InvariantViolation("probe", f"probe {pname!r} references unknown stage {target!r}")
                probes[pname] = ids.index(target) + (1 if where == "after" else 0)

        self.building.pop()
        return Chain(tuple(stages), probes, lo_routing)

    def check_all_used(self):
        for b in self.by_name.values():
            if b.kind == "chain" and b.name not in self.used_chains:
                raise InvariantViolation("chain", f"chain {b.name!r} is never referenced")
            if b.kind != "chain" and b.name not in self.used_components:
                raise InvariantViolation(b.kind, f"component {b.name!r} is never used by a chain")


def parse_chain_config(text: str, overrides: list[str] | None = None) -> Chain:
    """Parse scenario text (plus optional ``block.key=value`` overrides)."""
    blocks = parse_raw_blocks(text)
    if overrides:
        apply_overrides(blocks, overrides)
    asm = _Assembler(blocks)
    if "main" not in asm.by_name or asm.by_name["main"].kind != "chain":
        raise ConfigError("config has no [chain main] block")
    chain = asm.build_chain("main")
    asm.check_all_used()
    return chain


# -----------------------------------------------------------------------------
# serialization
# -----------------------------------------------------------------------------

def format_frequency(freq_hz: int) -> str:
    """Exact, human-oriented rendering (largest unit, decimal, no floats)."""
    for unit in ("GHz", "MHz", "kHz"):
        scale = _FREQ_UNITS[unit]
        if freq_hz >= scale:
            return f"{Decimal(freq_hz) / scale} {unit}"
    return f"{freq_hz} Hz"


def _fmt(value: float) -> str:
    return repr(float(value))


def _component_lines(stage_id: str, spec: ComponentSpec, lo_name: str | None = None) -> list[str]:
    if isinstance(spec, SourceSpec):
        lines = [f"[source {stage_id}]", f"freq = {format_frequency(spec.freq_hz)}",
                 f"power = {_fmt(spec.power_dbm)} dBm"]
        if spec.phase_rad:
            lines.append(f"phase = {_fmt(spec.phase_rad)} rad")
        if spec.num_tones != 1:
            lines.append(f"tones = {spec.num_tones}")
            lines.append(f"spacing = {format_frequency(spec.spacing_hz)}")
        for order, dbc in spec.harmonics:
            lines.append(f"harmonic {order} = {_fmt(dbc)} dBc")
        return lines
    if isinstance(spec, DoublerSpec):
        return [f"[doubler {stage_id}]",
                f"p_max = {_fmt(spec.p_max_dbm)} dBm",
                f"p_threshold = {_fmt(spec.p_threshold_dbm)} dBm",
                f"unleveled_slope = {_fmt(spec.unleveled_slope)}",
                f"fundamental_leakage = {_fmt(spec.fundamental_leakage_dbc)} dBc"]
    if isinstance(spec, MixerSpec):
        lines = [f"[mixer {stage_id}]",
                 f"conversion_loss = {_fmt(spec.conversion_loss_db)} dB",
                 f"lo = {lo_name}",
                 f"lo_to_rf_isolation = {_fmt(spec.lo_to_rf_isolation_db)} dB",
                 f"if_to_rf_isolation = {_fmt(spec.if_to_rf_isolation_db)} dB",
                 f"n_max = {spec.n_max}",
                 f"m_max = {spec.m_max}",
                 f"spur_floor = {_fmt(spec.spur_floor_dbc)} dBc",
                 f"lo_drive_min = {_fmt(spec.lo_drive_min_dbm)} dBm",
                 f"lo_drive_max = {_fmt(spec.lo_drive_max_dbm)} dBm"]
        for (n, m) in sorted(spec.spur_table):
            if (n, m) != (1, 1):
                lines.append(f"spur {n} {m} = {_fmt(spec.spur_table[(n, m)])} dBc")
        return lines
    if isinstance(spec, FilterSpec):
        lines = [f"[filter {stage_id}]"]
        lines.extend(
            f"breakpoint = {format_frequency(f)}, {_fmt(a)} dB" for f, a in spec.breakpoints
        )
        return lines
    if isinstance(spec, AmplifierSpec):
        lines = [f"[amplifier {stage_id}]",
                 f"gain = {_fmt(spec.gain_db)} dB",
                 f"oip3 = {_fmt(spec.oip3_dbm)} dBm"]
        if spec.oip5_dbm is not None:
            lines.append(f"oip5 = {_fmt(spec.oip5_dbm)} dBm")
        return lines
    if isinstance(spec, AttenuatorSpec):
        return [f"[attenuator {stage_id}]", f"loss = {_fmt(spec.loss_db)} dB"]
    raise TypeError(f"unknown component spec {type(spec).__name__}")


def _chain_lines(name: str, chain: Chain, lo_names: dict[str, str]) -> list[str]:
    lines = [f"[chain {name}]",
             "stages = " + " -> ".join(s.stage_id for s in chain.stages)]
    ids = [s.stage_id for s in chain.stages]
    for pname, pos in chain.probes.items():
        if pos == 0:
            lines.append(f"probe {pname} = input")
        else:
            lines.append(f"probe {pname} = after {ids[pos - 1]}")
    return lines


def serialize_chain(chain: Chain) -> str:
    """Render a Chain back to config text (parse . serialize = identity)."""
    sections: list[list[str]] = []
    chain_sections: list[list[str]] = []

    def walk(name: str, c: Chain):
        lo_names = {}
        for sid, spec in c.stages:
            if isinstance(spec, MixerSpec):
                sub_name = f"{sid}_lo"
                lo_names[sid] = sub_name
                walk(sub_name, c.lo_routing[sid])
                sections.append(_component_lines(sid, spec, sub_name))
            else:
                sections.append(_component_lines(sid, spec))
        chain_sections.append(_chain_lines(name, c, lo_names))

    walk("main", chain)
    blocks = sections + chain_sections
    return "\n\n".join("\n".join(b) for b in blocks) + "\n"


# -----------------------------------------------------------------------------
# validation warnings
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainWarning:
    code: str
    stage_id: str
    message: str


#: Margin above the passband floor beyond which the desired path counts as
#: excluded by a filter.
_PASSBAND_MARGIN_DB = 10.0


def validate_chain(chain: Chain) -> list[ChainWarning]:
    """Advisory checks: LO drive window, doubler knee, filter coverage.

    Returns warnings, never raises for the conditions it checks.  Levels are
    obtained by propagating each sub-chain standalone, so chains without a
    source (sweep scenarios) simply produce no level-dependent warnings.
    """
    from . import engine  # deferred: engine imports components too

    warnings: list[ChainWarning] = []

    def walk(c: Chain):
        result = engine.propagate(c)
        for idx, (sid, spec) in enumerate(c.stages):
            before = result.snapshots[idx]
            if isinstance(spec, DoublerSpec):
                strongest = before.strongest()
                if strongest is not None and strongest.power_dbm < spec.p_threshold_dbm:
                    warnings.append(ChainWarning(
                        "below-leveling-knee", sid,
                        f"doubler {sid!r} driven at {strongest.power_dbm:.2f} dBm, "
                        f"below its {spec.p_threshold_dbm:.2f} dBm leveling knee"))
            if isinstance(spec, MixerSpec):
                sub = c.lo_routing[sid]
                walk(sub)
                lo = engine.propagate(sub).final.strongest()
                if lo is not None:
                    if lo.power_dbm < spec.lo_drive_min_dbm:
                        warnings.append(ChainWarning(
                            "underdriven-mixer", sid,
                            f"mixer {sid!r} LO drive {lo.power_dbm:.2f} dBm below "
                            f"{spec.lo_drive_min_dbm:.2f} dBm"))
                    elif lo.power_dbm > spec.lo_drive_max_dbm:
                        warnings.append(ChainWarning(
                            "overdriven-mixer", sid,
                            f"mixer {sid!r} LO drive {lo.power_dbm:.2f} dBm above "
                            f"{spec.lo_drive_max_dbm:.2f} dBm"))

        desired = engine.propagate(c, desired_only=True)
        for idx, (sid, spec) in enumerate(c.stages):
            if isinstance(spec, FilterSpec):
                before = desired.snapshots[idx]
                if before.is_empty:
                    continue
                floor_att = spec.min_attenuation_db()
                excess = min(spec.attenuation_db(t.freq_hz) - floor_att for t in before)
                if excess > _PASSBAND_MARGIN_DB:
                    warnings.append(ChainWarning(
                        "filter-excludes-desired", sid,
                        f"filter {sid!r} attenuates every desired-path tone at least "
                        f"{excess:.1f} dB beyond its passband floor"))

    walk(chain)
    return warnings
