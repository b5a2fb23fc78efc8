"""Frequency planning: spur enumeration, degeneracy, aliasing, plan search.

A plan fixes the transmit IF and the two LO frequencies.  The planner
composes every up-conversion product |n*f_if +/- m_tx*f_lo_tx| with every
down-conversion product |f +/- m_rx*f_lo_rx| and classifies the results:
a plan is degenerate when some non-desired path lands at exactly the
desired received IF (integer-Hz equality, no tolerance).  Levels are
spur-table arithmetic only; the planner is the fast screening layer and
full-chain levels belong to the engine.

Grid searches run through the kernel backend in ``kernels`` so large
grids stay cheap; ``search_plans`` accepts a thread count and merges
chunk results in deterministic order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .chainconfig import (
    RawBlock,
    _build_mixer,
    apply_overrides,
    parse_frequency,
    parse_int_value,
    parse_raw_blocks,
)
from .components import MixerSpec
from .errors import ConfigError, InvariantViolation, SpurlineError

DEFAULT_GUARD_HZ = 10_000_000
SIDEBANDS = ("USB", "LSB")

SPUR_CSV_HEADER = "rx_if_hz,n,m_tx,m_rx,level_dbc,in_band,degenerate"
SEARCH_CSV_HEADER = (
    "rank,f_if_hz,f_lo_tx_hz,f_lo_rx_hz,"
    "degenerate_count,worst_inband_dbc,sampler_violations"
)


class EmptyGrid(SpurlineError):
    """No candidate plan survived the search constraints."""


def _check_freq(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvariantViolation(name, f"must be an integer Hz count, got {value!r}")
    if value <= 0:
        raise InvariantViolation(name, f"must be positive, got {value}")
    return value


@dataclass(frozen=True)
class FreqPlan:
    """One candidate frequency plan.

    ``sideband`` selects the desired transmit product: USB is
    f_lo_tx + f_if, LSB is |f_lo_tx - f_if|.  The desired receive path
    always uses the difference product |f_rf - f_lo_rx|.
    """

    f_if_hz: int
    f_lo_tx_hz: int
    f_lo_rx_hz: int
    rx_if_band_hz: tuple[int, int]
    sideband: str = "USB"
    sampler_fs_hz: int | None = None
    guard_hz: int = DEFAULT_GUARD_HZ

    def __post_init__(self):
        _check_freq("f_if_hz", self.f_if_hz)
        _check_freq("f_lo_tx_hz", self.f_lo_tx_hz)
        _check_freq("f_lo_rx_hz", self.f_lo_rx_hz)
        lo, hi = self.rx_if_band_hz
        if isinstance(lo, bool) or isinstance(hi, bool) or not (
            isinstance(lo, int) and isinstance(hi, int)
        ):
            raise InvariantViolation("rx_if_band_hz", "band edges must be integer Hz")
        if lo < 0 or lo >= hi:
            raise InvariantViolation(
                "rx_if_band_hz", f"need 0 <= low < high, got ({lo}, {hi})"
            )
        if self.sideband not in SIDEBANDS:
            raise InvariantViolation(
                "sideband", f"must be USB or LSB, got {self.sideband!r}"
            )
        if self.sampler_fs_hz is not None:
            _check_freq("sampler_fs_hz", self.sampler_fs_hz)
        if isinstance(self.guard_hz, bool) or not isinstance(self.guard_hz, int):
            raise InvariantViolation("guard_hz", "must be an integer Hz count")
        if self.guard_hz < 0:
            raise InvariantViolation("guard_hz", f"must be >= 0, got {self.guard_hz}")
        if self.desired_rf_hz == 0:
            raise InvariantViolation(
                "sideband", "LSB product folds the desired transmit signal to DC"
            )
        if self.desired_rx_if_hz == 0:
            raise InvariantViolation(
                "f_lo_rx_hz", "desired receive product lands at DC"
            )

    @property
    def usb(self) -> bool:
        return self.sideband == "USB"

    @property
    def desired_m_tx(self) -> int:
        return 1 if self.usb else -1

    @property
    def desired_rf_hz(self) -> int:
        if self.usb:
            return self.f_lo_tx_hz + self.f_if_hz
        return abs(self.f_lo_tx_hz - self.f_if_hz)

    @property
    def desired_rx_if_hz(self) -> int:
        return abs(self.desired_rf_hz - self.f_lo_rx_hz)


@dataclass(frozen=True)
class SpurEntry:
    """One harmonic-mixing path.  m_tx and m_rx carry the fold sign."""

    rx_if_hz: int
    n: int
    m_tx: int
    m_rx: int
    level_dbc: float
    in_band: bool
    degenerate_with_desired: bool
    desired: bool = False

    def csv_row(self) -> str:
        return (
            f"{self.rx_if_hz},{self.n},{self.m_tx:+d},{self.m_rx:+d},"
            f"{self.level_dbc:.6f},{str(self.in_band).lower()},"
            f"{str(self.degenerate_with_desired).lower()}"
        )


@dataclass(frozen=True)
class SpurReport:
    plan: FreqPlan
    desired_rx_if_hz: int
    entries: tuple[SpurEntry, ...]

    @property
    def degenerate(self) -> bool:
        return any(e.degenerate_with_desired for e in self.entries)

    @property
    def degenerate_count(self) -> int:
        return sum(1 for e in self.entries if e.degenerate_with_desired)

    def degenerate_entries(self) -> tuple[SpurEntry, ...]:
        return tuple(e for e in self.entries if e.degenerate_with_desired)

    def collision_orders(self) -> tuple[int, ...]:
        """Distinct |m_tx| of the colliding harmonic paths.

        The order-(1,1) image path is left out: it is removable by RF
        filtering, unlike same-LO harmonic collisions.
        """
        orders = {
            abs(e.m_tx)
            for e in self.entries
            if e.degenerate_with_desired and (abs(e.m_tx), abs(e.m_rx)) != (1, 1)
        }
        return tuple(sorted(orders))

    def worst_inband_dbc(self) -> float:
        """Strongest non-desired in-band level, -inf when none lands in band."""
        return max(
            (e.level_dbc for e in self.entries if e.in_band and not e.desired),
            default=-math.inf,
        )

    def near_degenerate_entries(self, tolerance_hz: int) -> tuple[SpurEntry, ...]:
        """Non-desired entries within tolerance of the desired IF but not on it."""
        return tuple(
            e
            for e in self.entries
            if not e.desired
            and not e.degenerate_with_desired
            and abs(e.rx_if_hz - self.desired_rx_if_hz) <= tolerance_hz
        )

    def to_csv(self) -> str:
        lines = [SPUR_CSV_HEADER]
        lines.extend(e.csv_row() for e in self.entries)
        return "\n".join(lines) + "\n"


def enumerate_rx_spurs(
    plan: FreqPlan,
    n_max: int | None = None,
    m_max: int | None = None,
    tx_mixer: MixerSpec | None = None,
    rx_mixer: MixerSpec | None = None,
) -> SpurReport:
    """Enumerate every (n, m_tx, m_rx) path and classify it.

    Paths whose up-converted or received frequency is exactly DC are
    discarded, mirroring the engine's mixer.  The desired path itself is
    included, flagged ``desired`` and never counted as degenerate.
    """
    tx_mixer = tx_mixer if tx_mixer is not None else MixerSpec()
    rx_mixer = rx_mixer if rx_mixer is not None else MixerSpec()
    if n_max is None:
        n_max = tx_mixer.n_max
    if m_max is None:
        m_max = max(tx_mixer.m_max, rx_mixer.m_max)
    if n_max < 1 or m_max < 1:
        raise InvariantViolation("orders", f"n_max and m_max must be >= 1, got {n_max}, {m_max}")

    fi, lt, lr = plan.f_if_hz, plan.f_lo_tx_hz, plan.f_lo_rx_hz
    des = plan.desired_rx_if_hz
    des_mt = plan.desired_m_tx
    band_lo, band_hi = plan.rx_if_band_hz
    m_range = [m for m in range(-m_max, m_max + 1) if m != 0]

    entries = []
    for n in range(1, n_max + 1):
        for mt in m_range:
            up = abs(n * fi + mt * lt)
            if up == 0:
                continue
            tx_level = tx_mixer.rejection_dbc(n, abs(mt))
            for mr in m_range:
                rx = abs(up + mr * lr)
                if rx == 0:
                    continue
                is_desired = n == 1 and mt == des_mt and mr == -1
                entries.append(
                    SpurEntry(
                        rx_if_hz=rx,
                        n=n,
                        m_tx=mt,
                        m_rx=mr,
                        level_dbc=tx_level + rx_mixer.rejection_dbc(1, abs(mr)),
                        in_band=band_lo <= rx <= band_hi,
                        degenerate_with_desired=not is_desired and rx == des,
                        desired=is_desired,
                    )
                )
    entries.sort(
        key=lambda e: (e.rx_if_hz, e.n, abs(e.m_tx), e.m_tx, abs(e.m_rx), e.m_rx)
    )
    return SpurReport(plan=plan, desired_rx_if_hz=des, entries=tuple(entries))


# -----------------------------------------------------------------------------
# sampler aliasing
# -----------------------------------------------------------------------------

def alias_frequency(f: int, fs: int) -> int:
    """First-Nyquist-zone image of f for sampling rate fs."""
    if fs <= 0:
        raise InvariantViolation("fs", f"sampling rate must be positive, got {fs}")
    if f < 0:
        raise InvariantViolation("f", f"frequency must be >= 0, got {f}")
    r = f % fs
    return min(r, fs - r)


@dataclass(frozen=True)
class SamplerViolation:
    entry: SpurEntry
    alias_hz: int
    desired_alias_hz: int
    distance_hz: int


def check_sampler_collisions(
    report: SpurReport,
    fs: int | None = None,
    guard: int | None = None,
) -> list[SamplerViolation]:
    """Flag spur entries whose alias lands within guard of the desired alias.

    A violation requires distance <= guard, so guard = 0 flags only exact
    alias collisions.  fs and guard default to the plan's values; the
    sampling rate has no global default and must come from one of the two.
    """
    if fs is None:
        fs = report.plan.sampler_fs_hz
    if fs is None:
        raise InvariantViolation(
            "sampler_fs", "no sampling rate given and the plan does not set one"
        )
    if guard is None:
        guard = report.plan.guard_hz
    if guard < 0:
        raise InvariantViolation("guard", f"must be >= 0, got {guard}")
    desired_alias = alias_frequency(report.desired_rx_if_hz, fs)
    violations = []
    for e in report.entries:
        if e.desired:
            continue
        a = alias_frequency(e.rx_if_hz, fs)
        d = abs(a - desired_alias)
        if d <= guard:
            violations.append(
                SamplerViolation(
                    entry=e,
                    alias_hz=a,
                    desired_alias_hz=desired_alias,
                    distance_hz=d,
                )
            )
    return violations


# -----------------------------------------------------------------------------
# grid search
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class PlanConstraints:
    """Finite search grids plus the bands every candidate must satisfy.

    Grids are normalized to sorted unique values so the ranking is
    invariant under input permutation.
    """

    f_if_grid: tuple[int, ...]
    f_lo_tx_grid: tuple[int, ...]
    f_lo_rx_grid: tuple[int, ...]
    rf_band_hz: tuple[int, int]
    rx_if_band_hz: tuple[int, int]
    sideband: str = "USB"
    n_max: int = 3
    m_max: int = 3
    tx_mixer: MixerSpec = field(default_factory=MixerSpec)
    rx_mixer: MixerSpec = field(default_factory=MixerSpec)
    sampler_fs_hz: int | None = None
    guard_hz: int = DEFAULT_GUARD_HZ
    max_results: int | None = None

    def __post_init__(self):
        for name in ("f_if_grid", "f_lo_tx_grid", "f_lo_rx_grid"):
            grid = getattr(self, name)
            if not grid:
                raise EmptyGrid(f"{name} is empty")
            for v in grid:
                _check_freq(name, v)
            object.__setattr__(self, name, tuple(sorted(set(grid))))
        for name in ("rf_band_hz", "rx_if_band_hz"):
            lo, hi = getattr(self, name)
            if lo < 0 or lo >= hi:
                raise InvariantViolation(name, f"need 0 <= low < high, got ({lo}, {hi})")
        if self.sideband not in SIDEBANDS:
            raise InvariantViolation("sideband", f"must be USB or LSB, got {self.sideband!r}")
        if self.n_max < 1 or self.m_max < 1:
            raise InvariantViolation("orders", "n_max and m_max must be >= 1")
        if self.sampler_fs_hz is not None:
            _check_freq("sampler_fs_hz", self.sampler_fs_hz)
        if self.guard_hz < 0:
            raise InvariantViolation("guard_hz", f"must be >= 0, got {self.guard_hz}")
        if self.max_results is not None and self.max_results < 1:
            raise InvariantViolation("max_results", "must be >= 1 when set")


@dataclass(frozen=True)
class RankedPlan:
    plan: FreqPlan
    degenerate_count: int
    worst_inband_dbc: float
    sampler_violations: int

    @property
    def score(self) -> tuple[int, float, int]:
        return (self.degenerate_count, self.worst_inband_dbc, self.sampler_violations)


def rejection_tables(
    tx_mixer: MixerSpec, rx_mixer: MixerSpec, n_max: int, m_max: int
) -> tuple[np.ndarray, np.ndarray]:
    """Dense kernel-layout rejection tables; unused (n=0 / m=0) slots are 0."""
    mw = m_max + 1
    tx = np.zeros((n_max + 1) * mw, dtype=np.float64)
    for n in range(1, n_max + 1):
        for m in range(1, m_max + 1):
            tx[n * mw + m] = tx_mixer.rejection_dbc(n, m)
    rx = np.zeros(mw, dtype=np.float64)
    for m in range(1, m_max + 1):
        rx[m] = rx_mixer.rejection_dbc(1, m)
    return tx, rx


def search_plans(
    constraints: PlanConstraints,
    threads: int = 1,
    impl=None,
) -> list[RankedPlan]:
    """Exhaustively score every grid plan and rank lexicographically.

    Score is (degenerate count, worst in-band spur level, sampler
    violations); ties break toward lower f_lo_tx, then f_lo_rx, then
    f_if, so the returned order is a deterministic total order.
    """
    c = constraints
    gi = np.asarray(c.f_if_grid, dtype=np.int64)
    gt = np.asarray(c.f_lo_tx_grid, dtype=np.int64)
    gr = np.asarray(c.f_lo_rx_grid, dtype=np.int64)
    mi, mt, mr = np.meshgrid(gi, gt, gr, indexing="ij")
    fi = mi.ravel()
    lt = mt.ravel()
    lr = mr.ravel()

    usb = c.sideband == "USB"
    rf = lt + fi if usb else np.abs(lt - fi)
    des = np.abs(rf - lr)
    keep = (
        (rf >= c.rf_band_hz[0])
        & (rf <= c.rf_band_hz[1])
        & (des >= c.rx_if_band_hz[0])
        & (des <= c.rx_if_band_hz[1])
        & (rf > 0)
        & (des > 0)
    )
    fi, lt, lr = fi[keep], lt[keep], lr[keep]
    if fi.size == 0:
        raise EmptyGrid("no grid plan satisfies the RF and receive-IF bands")

    tx_rej, rx_rej = rejection_tables(c.tx_mixer, c.rx_mixer, c.n_max, c.m_max)
    fs = c.sampler_fs_hz if c.sampler_fs_hz is not None else 0
    common = dict(
        usb=usb,
        n_max=c.n_max,
        m_max=c.m_max,
        tx_rej=tx_rej,
        rx_rej=rx_rej,
        band_lo=c.rx_if_band_hz[0],
        band_hi=c.rx_if_band_hz[1],
        fs=fs,
        guard=c.guard_hz,
        impl=impl,
    )
    threads = max(int(threads), 1)
    if threads == 1 or fi.size < 2 * threads:
        deg, worst, viol = kernels.plan_metrics(fi, lt, lr, **common)
    else:
        chunks = np.array_split(np.arange(fi.size), threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(
                    lambda ix: kernels.plan_metrics(fi[ix], lt[ix], lr[ix], **common),
                    chunks,
                )
            )
        deg = np.concatenate([p[0] for p in parts])
        worst = np.concatenate([p[1] for p in parts])
        viol = np.concatenate([p[2] for p in parts])

    order = np.lexsort((fi, lr, lt, viol, worst, deg))
    if c.max_results is not None:
        order = order[: c.max_results]
    ranked = []
    for i in order:
        plan = FreqPlan(
            f_if_hz=int(fi[i]),
            f_lo_tx_hz=int(lt[i]),
            f_lo_rx_hz=int(lr[i]),
            rx_if_band_hz=c.rx_if_band_hz,
            sideband=c.sideband,
            sampler_fs_hz=c.sampler_fs_hz,
            guard_hz=c.guard_hz,
        )
        ranked.append(
            RankedPlan(
                plan=plan,
                degenerate_count=int(deg[i]),
                worst_inband_dbc=float(worst[i]),
                sampler_violations=int(viol[i]),
            )
        )
    return ranked


def ranked_plans_to_csv(ranked: list[RankedPlan]) -> str:
    lines = [SEARCH_CSV_HEADER]
    for rank, r in enumerate(ranked, start=1):
        p = r.plan
        lines.append(
            f"{rank},{p.f_if_hz},{p.f_lo_tx_hz},{p.f_lo_rx_hz},"
            f"{r.degenerate_count},{r.worst_inband_dbc:.6f},{r.sampler_violations}"
        )
    return "\n".join(lines) + "\n"


# -----------------------------------------------------------------------------
# plan config files
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class PlanConfig:
    """Parsed .plan file: the base plan, orders, mixers, optional search."""

    plan: FreqPlan
    n_max: int
    m_max: int
    tx_mixer: MixerSpec
    rx_mixer: MixerSpec
    constraints: PlanConstraints | None = None


def _field(block: RawBlock, key: str) -> str:
    return f"[{block.kind} {block.name}] {key}"


def _parse_band(value: str, fld: str) -> tuple[int, int]:
    if ".." in value:
        left, _, right = value.partition("..")
    elif "," in value:
        left, _, right = value.partition(",")
    else:
        raise ConfigError(f"{fld}: band needs 'low .. high', got {value!r}")
    lo = parse_frequency(left.strip(), fld)
    hi = parse_frequency(right.strip(), fld)
    if lo >= hi:
        raise ConfigError(f"{fld}: band low must be below high, got {lo} >= {hi}")
    return lo, hi


def _parse_grid(value: str, fld: str) -> tuple[int, ...]:
    if ".." in value:
        left, _, right = value.partition("..")
        body, sep, step_txt = right.partition("step")
        if not sep:
            raise ConfigError(f"{fld}: range grid needs 'a .. b step c', got {value!r}")
        a = parse_frequency(left.strip(), fld)
        b = parse_frequency(body.strip(), fld)
        step = parse_frequency(step_txt.strip(), fld)
        if step <= 0:
            raise ConfigError(f"{fld}: step must be positive")
        if b < a:
            raise ConfigError(f"{fld}: range end {b} is below start {a}")
        return tuple(range(a, b + 1, step))
    if "," in value:
        return tuple(parse_frequency(p.strip(), fld) for p in value.split(","))
    return (parse_frequency(value.strip(), fld),)


def parse_plan_config(text: str, overrides: list[str] | None = None) -> PlanConfig:
    """Parse a .plan file.

    Blocks: one required [plan]; optional [mixer tx] and [mixer rx]
    (same keys as chain-config mixers, minus the LO reference); optional
    [search] with frequency grids ('a .. b step c' or comma lists), an
    rf_band, and max_results.
    """
    blocks = parse_raw_blocks(text)
    if overrides:
        apply_overrides(blocks, overrides)

    plan_block = None
    search_block = None
    mixers: dict[str, MixerSpec] = {}
    for b in blocks:
        if b.kind == "plan":
            if plan_block is not None:
                raise ConfigError("more than one [plan] block")
            plan_block = b
        elif b.kind == "search":
            if search_block is not None:
                raise ConfigError("more than one [search] block")
            search_block = b
        elif b.kind == "mixer":
            if b.name not in ("tx", "rx"):
                raise ConfigError(
                    f"plan-file mixers must be [mixer tx] or [mixer rx], got {b.name!r}"
                )
            if b.name in mixers:
                raise ConfigError(f"duplicate [mixer {b.name}] block")
            spec, lo_name = _build_mixer(b)
            if lo_name is not None:
                raise ConfigError(f"[mixer {b.name}] in a plan file takes no 'lo =' key")
            mixers[b.name] = spec
        else:
            raise ConfigError(f"unknown block kind {b.kind!r} in plan file")
    if plan_block is None:
        raise ConfigError("plan file needs a [plan] block")

    from .chainconfig import _Items

    it = _Items(plan_block)
    required = {}
    for key in ("f_if", "f_lo_tx", "f_lo_rx"):
        v = it.take(key)
        if v is None:
            raise ConfigError(f"[plan] is missing {key!r}")
        required[key] = parse_frequency(v, _field(plan_block, key))
    band_txt = it.take("rx_if_band")
    if band_txt is None:
        raise ConfigError("[plan] is missing 'rx_if_band'")
    rx_if_band = _parse_band(band_txt, _field(plan_block, "rx_if_band"))
    sideband = (it.take("sideband") or "USB").upper()
    fs_txt = it.take("sampler_fs")
    sampler_fs = (
        parse_frequency(fs_txt, _field(plan_block, "sampler_fs"))
        if fs_txt is not None
        else None
    )
    guard_txt = it.take("guard")
    guard = (
        parse_frequency(guard_txt, _field(plan_block, "guard"))
        if guard_txt is not None
        else DEFAULT_GUARD_HZ
    )
    n_max_txt = it.take("n_max")
    m_max_txt = it.take("m_max")
    n_max = parse_int_value(n_max_txt, _field(plan_block, "n_max")) if n_max_txt else 3
    m_max = parse_int_value(m_max_txt, _field(plan_block, "m_max")) if m_max_txt else 3
    it.finish()

    plan = FreqPlan(
        f_if_hz=required["f_if"],
        f_lo_tx_hz=required["f_lo_tx"],
        f_lo_rx_hz=required["f_lo_rx"],
        rx_if_band_hz=rx_if_band,
        sideband=sideband,
        sampler_fs_hz=sampler_fs,
        guard_hz=guard,
    )
    tx_mixer = mixers.get("tx", MixerSpec())
    rx_mixer = mixers.get("rx", MixerSpec())

    constraints = None
    if search_block is not None:
        it = _Items(search_block)
        grids = {}
        for key, fallback in (
            ("f_if", plan.f_if_hz),
            ("f_lo_tx", plan.f_lo_tx_hz),
            ("f_lo_rx", plan.f_lo_rx_hz),
        ):
            v = it.take(key)
            grids[key] = (
                _parse_grid(v, _field(search_block, key))
                if v is not None
                else (fallback,)
            )
        rf_txt = it.take("rf_band")
        if rf_txt is None:
            raise ConfigError("[search] is missing 'rf_band'")
        rf_band = _parse_band(rf_txt, _field(search_block, "rf_band"))
        max_txt = it.take("max_results")
        max_results = (
            parse_int_value(max_txt, _field(search_block, "max_results"))
            if max_txt is not None
            else None
        )
        it.finish()
        constraints = PlanConstraints(
            f_if_grid=grids["f_if"],
            f_lo_tx_grid=grids["f_lo_tx"],
            f_lo_rx_grid=grids["f_lo_rx"],
            rf_band_hz=rf_band,
            rx_if_band_hz=rx_if_band,
            sideband=sideband,
            n_max=n_max,
            m_max=m_max,
            tx_mixer=tx_mixer,
            rx_mixer=rx_mixer,
            sampler_fs_hz=sampler_fs,
            guard_hz=guard,
            max_results=max_results,
        )

    return PlanConfig(
        plan=plan,
        n_max=n_max,
        m_max=m_max,
        tx_mixer=tx_mixer,
        rx_mixer=rx_mixer,
        constraints=constraints,
    )
