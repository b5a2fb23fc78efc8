import pytest
from hypothesis import given, settings, strategies as st

from spurline.components import MixerSpec
from spurline.errors import ConfigError, InvariantViolation
from spurline.planner import (
    DEFAULT_GUARD_HZ,
    EmptyGrid,
    FreqPlan,
    PlanConstraints,
    SEARCH_CSV_HEADER,
    SPUR_CSV_HEADER,
    alias_frequency,
    check_sampler_collisions,
    enumerate_rx_spurs,
    parse_plan_config,
    ranked_plans_to_csv,
    search_plans,
)

GHZ = 1_000_000_000

SAME_LO = FreqPlan(
    f_if_hz=5 * GHZ,
    f_lo_tx_hz=25 * GHZ,
    f_lo_rx_hz=25 * GHZ,
    rx_if_band_hz=(4 * GHZ, 6 * GHZ),
)
CAL_TABLE = {(1, 1): 0.0, (1, 2): -40.0, (1, 3): -40.0}
CAL_MIXER = MixerSpec(spur_table=CAL_TABLE)

SPLIT = FreqPlan(
    f_if_hz=5_005_000_000,
    f_lo_tx_hz=20_995_000_000,
    f_lo_rx_hz=21_395_000_000,
    rx_if_band_hz=(3_500_000_000, 6 * GHZ),
    sampler_fs_hz=4 * GHZ,
    guard_hz=10_000_000,
)


def brute_force_entries(plan, n_max, m_max, tx_mixer, rx_mixer):
    """Reference enumeration, written independently of the library loop."""
    rows = set()
    ms = [m for m in range(1, m_max + 1)]
    for n in range(1, n_max + 1):
        for mt in ms:
            for st_ in (1, -1):
                up = abs(n * plan.f_if_hz + st_ * mt * plan.f_lo_tx_hz)
                if up == 0:
                    continue
                for mr in ms:
                    for sr in (1, -1):
                        rx = abs(up + sr * mr * plan.f_lo_rx_hz)
                        if rx == 0:
                            continue
                        level = tx_mixer.rejection_dbc(n, mt) + rx_mixer.rejection_dbc(1, mr)
                        rows.add((rx, n, st_ * mt, sr * mr, level))
    return rows


class TestFreqPlan:
    def test_rejects_non_integer_frequencies(self):
        with pytest.raises(InvariantViolation):
            FreqPlan(5e9, 25 * GHZ, 25 * GHZ, (4 * GHZ, 6 * GHZ))
        with pytest.raises(InvariantViolation):
            FreqPlan(0, 25 * GHZ, 25 * GHZ, (4 * GHZ, 6 * GHZ))

    def test_rejects_bad_band(self):
        with pytest.raises(InvariantViolation):
            FreqPlan(5 * GHZ, 25 * GHZ, 25 * GHZ, (6 * GHZ, 4 * GHZ))
        with pytest.raises(InvariantViolation):
            FreqPlan(5 * GHZ, 25 * GHZ, 25 * GHZ, (-1, 6 * GHZ))

    def test_rejects_bad_sideband(self):
        with pytest.raises(InvariantViolation):
            FreqPlan(5 * GHZ, 25 * GHZ, 25 * GHZ, (4 * GHZ, 6 * GHZ), sideband="DSB")

    def test_desired_frequencies_usb(self):
        assert SAME_LO.desired_rf_hz == 30 * GHZ
        assert SAME_LO.desired_rx_if_hz == 5 * GHZ
        assert SPLIT.desired_rf_hz == 26 * GHZ
        assert SPLIT.desired_rx_if_hz == 4_605_000_000

    def test_desired_frequencies_lsb(self):
        lsb = FreqPlan(5 * GHZ, 25 * GHZ, 25 * GHZ, (4 * GHZ, 6 * GHZ), sideband="LSB")
        assert lsb.desired_rf_hz == 20 * GHZ
        assert lsb.desired_rx_if_hz == 5 * GHZ
        assert lsb.desired_m_tx == -1

    def test_desired_dc_rejected(self):
        with pytest.raises(InvariantViolation):
            FreqPlan(5 * GHZ, 25 * GHZ, 30 * GHZ, (1, 6 * GHZ))


class TestSameLoPlan:
    def report(self):
        return enumerate_rx_spurs(SAME_LO, 3, 3, CAL_MIXER, CAL_MIXER)

    def test_entry_count(self):
        # 3 signal orders x 6 signed tx orders x 6 signed rx orders, no DC hits
        assert len(self.report().entries) == 108

    def test_degenerate_set_is_exact(self):
        rep = self.report()
        assert rep.degenerate
        assert rep.degenerate_count == 5
        got = {(e.n, e.m_tx, e.m_rx): e.level_dbc for e in rep.degenerate_entries()}
        assert got == {
            (1, -1, -1): 0.0,
            (1, 2, -2): -80.0,
            (1, -2, -2): -80.0,
            (1, 3, -3): -80.0,
            (1, -3, -3): -80.0,
        }
        assert all(e.rx_if_hz == 5 * GHZ for e in rep.degenerate_entries())

    def test_collision_orders_skip_the_image(self):
        # the (1,1) image is filterable; only harmonic folds are reported
        assert self.report().collision_orders() == (2, 3)

    def test_desired_entry_flagged_once(self):
        rep = self.report()
        desired = [e for e in rep.entries if e.desired]
        assert len(desired) == 1
        e = desired[0]
        assert (e.n, e.m_tx, e.m_rx) == (1, 1, -1)
        assert e.rx_if_hz == 5 * GHZ
        assert not e.degenerate_with_desired

    def test_worst_inband_excludes_desired(self):
        # the 0 dBc image dominates; the desired 0 dBc path does not count
        assert self.report().worst_inband_dbc() == 0.0

    def test_matches_brute_force(self):
        rep = self.report()
        got = {(e.rx_if_hz, e.n, e.m_tx, e.m_rx, e.level_dbc) for e in rep.entries}
        assert got == brute_force_entries(SAME_LO, 3, 3, CAL_MIXER, CAL_MIXER)

    def test_entries_sorted(self):
        keys = [
            (e.rx_if_hz, e.n, abs(e.m_tx), e.m_tx, abs(e.m_rx), e.m_rx)
            for e in self.report().entries
        ]
        assert keys == sorted(keys)

    def test_csv_header_and_rows(self):
        lines = self.report().to_csv().splitlines()
        assert lines[0] == SPUR_CSV_HEADER
        assert lines[1] == "5000000000,1,-1,-1,0.000000,true,true"
        assert lines[2] == "5000000000,1,+1,-1,0.000000,true,false"
        assert len(lines) == 109


class TestSplitPlan:
    def report(self):
        return enumerate_rx_spurs(SPLIT, 3, 3, CAL_MIXER, CAL_MIXER)

    def test_not_degenerate(self):
        rep = self.report()
        assert not rep.degenerate
        assert rep.degenerate_count == 0
        assert rep.collision_orders() == ()

    def test_harmonic_paths_split_off(self):
        rep = self.report()
        by_path = {(e.n, e.m_tx, e.m_rx): e for e in rep.entries}
        assert rep.desired_rx_if_hz == 4_605_000_000
        assert by_path[(1, 2, -2)].rx_if_hz == 4_205_000_000
        assert by_path[(1, 3, -3)].rx_if_hz == 3_805_000_000
        assert by_path[(1, 2, -2)].level_dbc == -80.0
        assert by_path[(1, 3, -3)].level_dbc == -80.0
        assert by_path[(1, 2, -2)].in_band
        assert by_path[(1, 3, -3)].in_band

    def test_near_degenerate_window(self):
        rep = self.report()
        # the k=2 path sits 400 MHz away; a 500 MHz window catches it
        near = rep.near_degenerate_entries(500_000_000)
        assert (1, 2, -2) in {(e.n, e.m_tx, e.m_rx) for e in near}
        assert rep.near_degenerate_entries(100_000_000) == ()


@st.composite
def same_lo_plans(draw):
    fi = draw(st.integers(1, 10_000))
    lo = draw(st.integers(1, 50_000))
    if fi == lo:  # USB desired rx IF would be fine, but avoid up==0 for LSB twins
        lo += 1
    return FreqPlan(fi, lo, lo, (1, 10**15))


@given(same_lo_plans(), st.integers(2, 4))
@settings(max_examples=60, deadline=None)
def test_same_lo_is_always_degenerate(plan, m_max):
    # (1, +k, -k) folds back to the transmit IF for every k when both
    # mixers share an LO
    rep = enumerate_rx_spurs(plan, 1, m_max, MixerSpec(m_max=m_max), MixerSpec(m_max=m_max))
    assert rep.degenerate
    paths = {(e.n, e.m_tx, e.m_rx) for e in rep.degenerate_entries()}
    assert (1, 2, -2) in paths


@given(
    st.integers(1, 10**12),
    st.integers(1, 10**12),
    st.integers(2, 10**10),
)
def test_shifting_both_los_preserves_separations(fi, lt, shift):
    base = FreqPlan(fi, lt, lt + 400, (1, 10**15))
    moved = FreqPlan(fi, lt + shift, lt + shift + 400, (1, 10**15))
    rb = enumerate_rx_spurs(base, 1, 3, CAL_MIXER, CAL_MIXER)
    rm = enumerate_rx_spurs(moved, 1, 3, CAL_MIXER, CAL_MIXER)
    for k in (2, 3):
        eb = next(e for e in rb.entries if (e.n, e.m_tx, e.m_rx) == (1, k, -k))
        em = next(e for e in rm.entries if (e.n, e.m_tx, e.m_rx) == (1, k, -k))
        # same-order harmonic fold offsets depend only on the LO separation
        assert eb.rx_if_hz - rb.desired_rx_if_hz == em.rx_if_hz - rm.desired_rx_if_hz


class TestAliasing:
    def test_known_values(self):
        fs = 4 * GHZ
        assert alias_frequency(605_000_000, fs) == 605_000_000
        assert alias_frequency(4_605_000_000, fs) == 605_000_000
        assert alias_frequency(3_395_000_000, fs) == 605_000_000
        assert alias_frequency(2 * GHZ, fs) == 2 * GHZ
        assert alias_frequency(4 * GHZ, fs) == 0

    @given(st.integers(0, 10**14), st.integers(1, 10**12))
    def test_alias_bounded_by_nyquist(self, f, fs):
        a = alias_frequency(f, fs)
        assert 0 <= 2 * a <= fs

    @given(st.integers(0, 10**14), st.integers(1, 10**12))
    def test_alias_idempotent(self, f, fs):
        assert alias_frequency(alias_frequency(f, fs), fs) == alias_frequency(f, fs)

    @given(st.integers(0, 10**14), st.integers(1, 10**12), st.integers(0, 100))
    def test_alias_periodic_in_fs(self, f, fs, k):
        assert alias_frequency(f + k * fs, fs) == alias_frequency(f, fs)

    @given(st.integers(0, 10**12), st.integers(1, 10**12))
    def test_alias_mirror_symmetry(self, f, fs):
        assert alias_frequency(fs - (f % fs), fs) == alias_frequency(f % fs, fs)


class TestSamplerCollisions:
    def test_split_plan_violations_frozen(self):
        rep = enumerate_rx_spurs(SPLIT, 3, 3, CAL_MIXER, CAL_MIXER)
        violations = check_sampler_collisions(rep)
        got = [(v.entry.n, v.entry.m_tx, v.entry.m_rx) for v in violations]
        assert got == [(1, 1, 1), (3, 3, -1), (3, 3, 1)]
        assert all(v.distance_hz == 0 for v in violations)
        assert all(v.alias_hz == 605_000_000 for v in violations)

    def test_harmonic_folds_clear_the_guard(self):
        rep = enumerate_rx_spurs(SPLIT, 3, 3, CAL_MIXER, CAL_MIXER)
        colliding = {(v.entry.n, v.entry.m_tx, v.entry.m_rx)
                     for v in check_sampler_collisions(rep)}
        # the 400/800 MHz split moves the k=2,3 folds off the desired alias
        assert (1, 2, -2) not in colliding
        assert (1, 3, -3) not in colliding

    def test_explicit_fs_overrides_plan(self):
        rep = enumerate_rx_spurs(SPLIT, 3, 3, CAL_MIXER, CAL_MIXER)
        wide = check_sampler_collisions(rep, fs=4 * GHZ, guard=500_000_000)
        assert len(wide) > len(check_sampler_collisions(rep))

    def test_missing_fs_rejected(self):
        rep = enumerate_rx_spurs(SAME_LO, 3, 3, CAL_MIXER, CAL_MIXER)
        with pytest.raises(InvariantViolation):
            check_sampler_collisions(rep)

    def test_desired_entry_never_violates(self):
        rep = enumerate_rx_spurs(SPLIT, 3, 3, CAL_MIXER, CAL_MIXER)
        violations = check_sampler_collisions(rep)
        assert not any(v.entry.desired for v in violations)


def make_constraints(**kw):
    base = dict(
        f_if_grid=(5_005_000_000,),
        f_lo_tx_grid=tuple(20_895_000_000 + 50_000_000 * k for k in range(5)),
        f_lo_rx_grid=tuple(21_295_000_000 + 50_000_000 * k for k in range(5)),
        rf_band_hz=(25 * GHZ, 27 * GHZ),
        rx_if_band_hz=(3_500_000_000, 6 * GHZ),
        tx_mixer=CAL_MIXER,
        rx_mixer=CAL_MIXER,
        sampler_fs_hz=4 * GHZ,
    )
    base.update(kw)
    return PlanConstraints(**base)


class TestSearch:
    def test_grids_normalized(self):
        c = PlanConstraints(
            f_if_grid=(2, 1, 2),
            f_lo_tx_grid=(5, 4),
            f_lo_rx_grid=(7,),
            rf_band_hz=(1, 10**12),
            rx_if_band_hz=(1, 10**12),
        )
        assert c.f_if_grid == (1, 2)
        assert c.f_lo_tx_grid == (4, 5)

    def test_empty_grid_rejected(self):
        with pytest.raises(EmptyGrid):
            PlanConstraints(
                f_if_grid=(),
                f_lo_tx_grid=(1,),
                f_lo_rx_grid=(1,),
                rf_band_hz=(1, 2),
                rx_if_band_hz=(1, 2),
            )

    def test_infeasible_bands_rejected(self):
        with pytest.raises(EmptyGrid):
            search_plans(make_constraints(rf_band_hz=(1, 2)))

    def test_ranking_prefers_clean_plans(self):
        ranked = search_plans(make_constraints())
        assert ranked
        scores = [r.score for r in ranked]
        assert scores == sorted(scores)
        best = ranked[0]
        assert best.degenerate_count == 0
        assert best.sampler_violations == 0
        # deterministic tie-break: lowest f_lo_tx, then f_lo_rx
        assert best.plan.f_lo_tx_hz == 20_945_000_000
        assert best.plan.f_lo_rx_hz == 21_345_000_000

    def test_scores_agree_with_enumeration(self):
        c = make_constraints()
        for r in search_plans(c)[:5]:
            rep = enumerate_rx_spurs(r.plan, c.n_max, c.m_max, c.tx_mixer, c.rx_mixer)
            assert r.degenerate_count == rep.degenerate_count
            assert r.worst_inband_dbc == rep.worst_inband_dbc()
            assert r.sampler_violations == len(
                check_sampler_collisions(rep, fs=c.sampler_fs_hz, guard=c.guard_hz)
            )

    def test_grid_permutation_invariance(self):
        a = make_constraints()
        b = make_constraints(
            f_lo_tx_grid=tuple(reversed(a.f_lo_tx_grid)),
            f_lo_rx_grid=a.f_lo_rx_grid[::-1],
        )
        assert search_plans(a) == search_plans(b)

    def test_thread_count_invariance(self):
        assert search_plans(make_constraints(), threads=1) == search_plans(
            make_constraints(), threads=4
        )

    def test_max_results(self):
        assert len(search_plans(make_constraints(max_results=3))) == 3

    def test_csv_output(self):
        lines = ranked_plans_to_csv(search_plans(make_constraints())).splitlines()
        assert lines[0] == SEARCH_CSV_HEADER
        assert lines[1].startswith("1,5005000000,20945000000,21345000000,0,")


class TestPlanConfig:
    def test_scenario_files_parse(self, scenario_dir):
        cfg = parse_plan_config((scenario_dir / "degenerate.plan").read_text())
        assert cfg.plan == FreqPlan(
            5 * GHZ, 25 * GHZ, 25 * GHZ, (4 * GHZ, 6 * GHZ)
        )
        assert cfg.n_max == 3 and cfg.m_max == 3
        assert cfg.tx_mixer.spur_table == CAL_TABLE
        assert cfg.constraints is None

        cfg2 = parse_plan_config((scenario_dir / "split_fig3b.plan").read_text())
        assert cfg2.plan == SPLIT

        cfg3 = parse_plan_config((scenario_dir / "plan_search.plan").read_text())
        assert cfg3.constraints is not None
        assert cfg3.constraints.max_results == 10
        assert len(cfg3.constraints.f_lo_tx_grid) == 5

    def test_overrides(self, scenario_dir):
        text = (scenario_dir / "degenerate.plan").read_text()
        cfg = parse_plan_config(text, overrides=["plan.f_lo_rx=26 GHz"])
        assert cfg.plan.f_lo_rx_hz == 26 * GHZ

    def test_unknown_key_rejected(self, scenario_dir):
        text = (scenario_dir / "degenerate.plan").read_text()
        with pytest.raises(ConfigError):
            parse_plan_config(text, overrides=["plan.wibble=3"])

    def test_duplicate_plan_block_rejected(self, scenario_dir):
        text = (scenario_dir / "degenerate.plan").read_text()
        with pytest.raises(ConfigError):
            parse_plan_config(text + "\n[plan]\nf_if = 1 GHz\n")

    def test_mixer_block_rejects_lo_key(self):
        text = """
[plan]
f_if = 5 GHz
f_lo_tx = 25 GHz
f_lo_rx = 25 GHz
rx_if_band = 4 GHz .. 6 GHz

[mixer tx]
lo = somewhere
"""
        with pytest.raises(ConfigError):
            parse_plan_config(text)

    def test_missing_required_key(self):
        with pytest.raises(ConfigError):
            parse_plan_config("[plan]\nf_if = 5 GHz\n")

    def test_guard_default(self, scenario_dir):
        cfg = parse_plan_config((scenario_dir / "degenerate.plan").read_text())
        assert cfg.plan.guard_hz == DEFAULT_GUARD_HZ
