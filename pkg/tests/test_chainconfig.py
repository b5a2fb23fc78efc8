import pytest
from hypothesis import given, strategies as st

from spurline.chainconfig import (
    apply_overrides,
    format_frequency,
    parse_chain_config,
    parse_frequency,
    parse_phase,
    parse_raw_blocks,
    serialize_chain,
    validate_chain,
)
from spurline.components import (
    AmplifierSpec,
    DoublerSpec,
    FilterSpec,
    MixerSpec,
    SourceSpec,
)
from spurline.errors import (
    ConfigSyntaxError,
    DanglingLoReference,
    InvariantViolation,
    UnknownComponentKind,
)

MINIMAL = """
[source src]
freq = 5 GHz
power = -10 dBm

[chain main]
stages = src
"""


class TestParseFrequency:
    def test_exact_integer_hertz(self):
        assert parse_frequency("5 GHz") == 5_000_000_000
        assert parse_frequency("29.5 GHz") == 29_500_000_000
        assert parse_frequency("0.001 MHz") == 1_000
        assert parse_frequency("12345") == 12_345  # bare number is Hz
        assert parse_frequency("20.995 GHz") == 20_995_000_000

    def test_no_binary_float_rounding(self):
        # 0.1 GHz is not representable in binary; Decimal keeps it exact
        assert parse_frequency("0.1 GHz") == 100_000_000
        assert parse_frequency("4.605 GHz") == 4_605_000_000

    def test_fractional_hertz_rejected(self):
        with pytest.raises(InvariantViolation):
            parse_frequency("0.5 Hz")
        with pytest.raises(InvariantViolation):
            parse_frequency("1.0000000001 GHz")

    def test_bad_unit_and_number(self):
        with pytest.raises(InvariantViolation):
            parse_frequency("5 THz")
        with pytest.raises(InvariantViolation):
            parse_frequency("five GHz")
        with pytest.raises(InvariantViolation):
            parse_frequency("-1 kHz")

    @given(st.integers(0, 10**12))
    def test_round_trips_formatter(self, hz):
        assert parse_frequency(format_frequency(hz)) == hz


def test_parse_phase_degrees_and_radians():
    assert parse_phase("90 deg", "phase") == pytest.approx(1.5707963267948966)
    assert parse_phase("1.5 rad", "phase") == pytest.approx(1.5)
    assert parse_phase("0.25", "phase") == pytest.approx(0.25)


class TestRawBlocks:
    def test_blocks_and_comments(self):
        blocks = parse_raw_blocks(
            "# leading comment\n[source a]\nfreq = 1 GHz  # trailing\n\n[chain main]\npath = a\n"
        )
        assert [(b.kind, b.name) for b in blocks] == [("source", "a"), ("chain", "main")]
        assert blocks[0].items == [("freq", "1 GHz", 3)]

    def test_header_without_name_uses_kind(self):
        blocks = parse_raw_blocks("[plan]\nf_if = 1 GHz\n")
        assert blocks[0].name == "plan"

    def test_syntax_errors_carry_line_numbers(self):
        with pytest.raises(ConfigSyntaxError) as e:
            parse_raw_blocks("[source a]\nnot a key value line\n")
        assert e.value.line == 2
        with pytest.raises(ConfigSyntaxError):
            parse_raw_blocks("key = before any block\n")
        with pytest.raises(ConfigSyntaxError):
            parse_raw_blocks("[source a]\nfreq =\n")
        with pytest.raises(ConfigSyntaxError):
            parse_raw_blocks("[bad header\n")


class TestOverrides:
    def test_replace_and_append(self):
        blocks = parse_raw_blocks(MINIMAL)
        apply_overrides(blocks, ["src.power=-20 dBm", "src.phase=0.5 rad"])
        items = dict((k, v) for k, v, _ in blocks[0].items)
        assert items["power"] == "-20 dBm"
        assert items["phase"] == "0.5 rad"

    def test_bad_override_shapes(self):
        blocks = parse_raw_blocks(MINIMAL)
        for bad in ("src.power", "power=-20 dBm", "nosuch.key=1", "src.=1"):
            with pytest.raises(Exception):
                apply_overrides(blocks, [bad])

    def test_override_through_config_parse(self):
        chain = parse_chain_config(MINIMAL, overrides=["src.power=-25 dBm"])
        src = chain.stages[0].spec
        assert isinstance(src, SourceSpec)
        assert src.power_dbm == -25.0


class TestChainAssembly:
    def test_minimal_chain(self):
        chain = parse_chain_config(MINIMAL)
        assert [sid for sid, _ in chain.stages] == ["src"]
        assert chain.probes == {}

    def test_unknown_component_kind(self):
        with pytest.raises(UnknownComponentKind):
            parse_chain_config("[widget w]\nx = 1\n\n[chain main]\npath = w\n")

    def test_unknown_key_rejected(self):
        with pytest.raises(InvariantViolation):
            parse_chain_config(
                "[source src]\nfreq = 1 GHz\npower = 0 dBm\nbogus = 3\n\n[chain main]\npath = src\n"
            )

    def test_missing_required_key(self):
        with pytest.raises(InvariantViolation):
            parse_chain_config("[source src]\nfreq = 1 GHz\n\n[chain main]\npath = src\n")

    def test_mixer_requires_lo_chain(self):
        text = """
[source src]
freq = 5 GHz
power = -10 dBm

[mixer m1]
lo = nonexistent
conversion_loss = 8 dB

[chain main]
stages = src -> m1
"""
        with pytest.raises(DanglingLoReference):
            parse_chain_config(text)

    def test_unreferenced_block_rejected(self):
        text = MINIMAL + "\n[attenuator pad]\nloss = 3 dB\n"
        with pytest.raises(InvariantViolation):
            parse_chain_config(text)

    def test_duplicate_stage_in_path(self):
        text = """
[source src]
freq = 5 GHz
power = -10 dBm

[attenuator pad]
loss = 3 dB

[chain main]
stages = src -> pad -> pad
"""
        with pytest.raises(InvariantViolation):
            parse_chain_config(text)


def test_scenario_tx_chain_shape(scenario_dir):
    chain = parse_chain_config((scenario_dir / "tx_fig1.chain").read_text())
    ids = [sid for sid, _ in chain.stages]
    assert ids == ["if_src", "mix1", "hpf26", "pad6", "amp1"]
    assert set(chain.probes) == {"post_mix", "post_filter"}
    assert chain.probes["post_mix"] == chain.stage_index("mix1") + 1
    lo = chain.lo_routing["mix1"]
    assert [sid for sid, _ in lo.stages] == ["lo_src", "dbl1"]
    assert isinstance(lo.stages[1].spec, DoublerSpec)
    mixer = chain.stages[1].spec
    assert isinstance(mixer, MixerSpec)
    assert mixer.conversion_loss_db == 8.0
    assert mixer.lo_to_rf_isolation_db == 25.0
    amp = chain.stages[4].spec
    assert isinstance(amp, AmplifierSpec)
    assert amp.oip3_dbm == 10.5


def test_scenario_filter_masks_differ(scenario_dir):
    hp = parse_chain_config((scenario_dir / "tx_fig1.chain").read_text())
    bp = parse_chain_config((scenario_dir / "bpf_swap_sec33.chain").read_text())
    f_hp = next(s for _, s in hp.stages if isinstance(s, FilterSpec))
    f_bp = next(s for _, s in bp.stages if isinstance(s, FilterSpec))
    # high-pass lets 25 GHz through lightly; the bandpass crushes it
    assert f_hp.attenuation_db(25_000_000_000) < 20.0
    assert f_bp.attenuation_db(25_000_000_000) > 150.0
    assert f_hp.attenuation_db(30_000_000_000) < 3.0
    assert f_bp.attenuation_db(30_000_000_000) < 3.0


def test_serialize_parse_round_trip(scenario_dir):
    for name in ("tx_fig1.chain", "rx_fig1.chain", "nondegenerate_fig4.chain"):
        chain = parse_chain_config((scenario_dir / name).read_text())
        text = serialize_chain(chain)
        again = parse_chain_config(text)
        assert again == chain
        # serialization is a fixed point
        assert serialize_chain(again) == text


def test_validate_chain_flags_undriven_mixer_band():
    # desired product lands where the filter attenuates heavily
    text = """
[source src]
freq = 5 GHz
power = -10 dBm

[lowpass lp]
breakpoint = 1 GHz, 0 dB
breakpoint = 2 GHz, 80 dB

[chain main]
stages = src -> lp
"""
    chain = parse_chain_config(text.replace("[lowpass lp]", "[filter lp]"))
    warnings = validate_chain(chain)
    assert any("lp" in w.stage_id for w in warnings)


def test_validate_chain_clean_scenario(scenario_dir):
    chain = parse_chain_config((scenario_dir / "tx_fig1.chain").read_text())
    assert validate_chain(chain) == []
