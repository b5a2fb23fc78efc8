import cmath
import math

import pytest
from hypothesis import given, settings, strategies as st

from spurline.touchstone import (
    BadNumericField,
    MalformedOptionLine,
    NonMonotoneGrid,
    OutOfRange,
    TouchstoneError,
    TwoPortSParams,
    WrongPortCount,
    parse_touchstone,
    serialize_touchstone,
)

BASIC_MA = """! two points, magnitude-angle
# GHz S MA R 50
1.0  0.9 -10  0.05 45  0.05 45  0.8 -20
2.0  0.8 -15  0.10 40  0.10 40  0.7 -25
"""


def test_parse_basic_ma():
    sp = parse_touchstone(BASIC_MA)
    assert sp.n_points == 2
    assert sp.freq_grid_hz == (1_000_000_000, 2_000_000_000)
    assert sp.reference_impedance_ohms == 50.0
    assert sp.s11[0] == pytest.approx(cmath.rect(0.9, math.radians(-10)))
    assert sp.s21[1] == pytest.approx(cmath.rect(0.10, math.radians(40)))


def test_option_line_defaults():
    # bare option line means GHz / S / MA / 50 ohm
    sp = parse_touchstone("# \n1 0.5 0 0.1 0 0.1 0 0.5 0\n")
    assert sp.freq_grid_hz == (1_000_000_000,)
    assert sp.reference_impedance_ohms == 50.0
    assert sp.s11[0] == pytest.approx(0.5 + 0j)


def test_option_tokens_any_order_and_case():
    a = parse_touchstone("# R 75 mhz s ri\n1 0.5 0.1 0 0 0 0 0.5 -0.1\n")
    assert a.freq_grid_hz == (1_000_000,)
    assert a.reference_impedance_ohms == 75.0
    assert a.s11[0] == pytest.approx(0.5 + 0.1j)
    assert a.s22[0] == pytest.approx(0.5 - 0.1j)


def test_db_format():
    sp = parse_touchstone("# Hz S DB R 50\n100 -6.0205999132796 0 -40 90 -40 90 0 0\n")
    assert abs(sp.s11[0]) == pytest.approx(0.5, abs=1e-12)
    assert sp.s21[0] == pytest.approx(cmath.rect(0.01, math.pi / 2))
    assert abs(sp.s22[0]) == pytest.approx(1.0)


def test_comments_and_blank_lines_ignored():
    text = "!leading\n\n# GHz S MA R 50\n! mid\n1.0 1 0 0 0 0 0 1 0 ! trailing\n\n"
    assert parse_touchstone(text).n_points == 1


def test_exact_decimal_frequencies():
    sp = parse_touchstone("# GHz S MA R 50\n29.5 1 0 0 0 0 0 1 0\n")
    assert sp.freq_grid_hz == (29_500_000_000,)
    sp = parse_touchstone("# kHz S MA R 50\n0.25 1 0 0 0 0 0 1 0\n")
    assert sp.freq_grid_hz == (250,)


class TestParseErrors:
    def test_version_two_rejected(self):
        with pytest.raises(MalformedOptionLine):
            parse_touchstone("[Version] 2.0\n# GHz S MA R 50\n1 1 0 0 0 0 0 1 0\n")

    def test_bad_option_line(self):
        for line in ("# GHz Y MA R 50", "# GHz S MA R", "# GHz S XX R 50", "# S S"):
            with pytest.raises(MalformedOptionLine) as e:
                parse_touchstone(line + "\n1 1 0 0 0 0 0 1 0\n")
            assert "line 1" in str(e.value)

    def test_duplicate_option_line(self):
        with pytest.raises(MalformedOptionLine):
            parse_touchstone("# GHz S MA R 50\n# GHz S MA R 50\n1 1 0 0 0 0 0 1 0\n")

    def test_option_after_data(self):
        with pytest.raises(MalformedOptionLine):
            parse_touchstone("# GHz S MA R 50\n1 1 0 0 0 0 0 1 0\n# Hz S MA R 50\n")

    def test_wrong_column_count(self):
        with pytest.raises(WrongPortCount) as e:
            parse_touchstone("# GHz S MA R 50\n1 1 0 0 0\n")
        assert e.value.line == 2
        with pytest.raises(WrongPortCount):
            parse_touchstone("# GHz S MA R 50\n1 1 0 0 0 0 0 1 0 0 0\n")

    def test_non_monotone_grid(self):
        text = "# GHz S MA R 50\n2 1 0 0 0 0 0 1 0\n1 1 0 0 0 0 0 1 0\n"
        with pytest.raises(NonMonotoneGrid):
            parse_touchstone(text)
        dup = "# GHz S MA R 50\n1 1 0 0 0 0 0 1 0\n1 1 0 0 0 0 0 1 0\n"
        with pytest.raises(NonMonotoneGrid):
            parse_touchstone(dup)

    def test_bad_numeric_field(self):
        with pytest.raises(BadNumericField) as e:
            parse_touchstone("# GHz S MA R 50\n1 1 0 zero 0 0 0 1 0\n")
        assert e.value.line == 2
        with pytest.raises(BadNumericField):
            parse_touchstone("# GHz S MA R 50\nonepointfive 1 0 0 0 0 0 1 0\n")
        with pytest.raises(BadNumericField):
            parse_touchstone("# GHz S MA R 50\n1 nan 0 0 0 0 0 1 0\n")

    def test_empty_document(self):
        with pytest.raises(TouchstoneError):
            parse_touchstone("! nothing here\n")

    def test_errors_are_typed_and_ordered(self):
        # every error class is a TouchstoneError carrying its line
        for exc in (MalformedOptionLine, WrongPortCount, NonMonotoneGrid, BadNumericField):
            assert issubclass(exc, TouchstoneError)


class TestInterpolation:
    SP = TwoPortSParams(
        freq_grid_hz=(1_000, 3_000),
        s11=(0.0 + 0.0j, 1.0 + 0.0j),
        s21=(0.5 + 0.5j, 0.5 - 0.5j),
        s12=(0.5 + 0.5j, 0.5 - 0.5j),
        s22=(0.0 + 0.0j, 0.0 + 0.0j),
    )

    def test_midpoint_linear(self):
        s11, s21, s12, s22 = self.SP.at_frequency(2_000)
        assert s11 == pytest.approx(0.5 + 0.0j)
        assert s21 == pytest.approx(0.5 + 0.0j)  # real/imag interpolated separately
        assert s22 == 0.0 + 0.0j

    def test_grid_points_exact(self):
        assert self.SP.at_frequency(1_000)[0] == 0.0 + 0.0j
        assert self.SP.at_frequency(3_000)[0] == 1.0 + 0.0j

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            self.SP.at_frequency(999)
        with pytest.raises(OutOfRange):
            self.SP.at_frequency(3_001)

    def test_validation(self):
        with pytest.raises(TouchstoneError):
            TwoPortSParams((1, 2), (0j,), (0j, 0j), (0j, 0j), (0j, 0j))
        with pytest.raises(TouchstoneError):
            TwoPortSParams((2, 1), (0j, 0j), (0j, 0j), (0j, 0j), (0j, 0j))
        with pytest.raises(TouchstoneError):
            TwoPortSParams((1,), (0j,), (0j,), (0j,), (0j,), reference_impedance_ohms=0.0)


def test_serialize_golden():
    sp = TwoPortSParams((1_000_000_000,), (0.5 + 0j,), (0.1 + 0j,), (0.1 + 0j,), (0.5 + 0j,))
    text = serialize_touchstone(sp, unit="GHz", fmt="MA")
    lines = text.splitlines()
    assert lines[0].startswith("!")
    assert lines[1] == "# GHz S MA R 50"
    assert lines[2].split()[0] == "1.000000000"
    assert parse_touchstone(text) == sp


def test_serialize_db_rejects_zero_magnitude():
    sp = TwoPortSParams((1,), (0j,), (0j,), (0j,), (0j,))
    with pytest.raises(ValueError):
        serialize_touchstone(sp, fmt="DB")


def test_serialize_rejects_unknown_unit_and_format():
    sp = TwoPortSParams((1,), (1 + 0j,), (1 + 0j,), (1 + 0j,), (1 + 0j,))
    with pytest.raises(ValueError):
        serialize_touchstone(sp, unit="THz")
    with pytest.raises(ValueError):
        serialize_touchstone(sp, fmt="IQ")


_cval = st.complex_numbers(
    min_magnitude=1e-6, max_magnitude=10.0, allow_nan=False, allow_infinity=False
)


@st.composite
def sparam_sets(draw):
    n = draw(st.integers(1, 8))
    freqs = draw(
        st.lists(st.integers(1, 10**12), min_size=n, max_size=n, unique=True)
    )
    freqs.sort()
    mk = lambda: tuple(draw(_cval) for _ in range(n))
    return TwoPortSParams(tuple(freqs), mk(), mk(), mk(), mk())


@given(sparam_sets(), st.sampled_from(["MA", "DB", "RI"]), st.sampled_from(["Hz", "kHz", "MHz", "GHz"]))
@settings(max_examples=80, deadline=None)
def test_round_trip_all_formats(sp, fmt, unit):
    back = parse_touchstone(serialize_touchstone(sp, unit=unit, fmt=fmt))
    assert back.freq_grid_hz == sp.freq_grid_hz
    for a, b in zip(
        back.s11 + back.s21 + back.s12 + back.s22,
        sp.s11 + sp.s21 + sp.s12 + sp.s22,
    ):
        assert abs(a - b) <= 1e-9 * max(1.0, abs(b))
