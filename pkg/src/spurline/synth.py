"""Synthetic antenna-coupling dataset with a documented closed form.

Measured coupling numbers for the separation sweep are not published,
so end-to-end tests use this generator: an exponential-decay (linear in
dB) coupling model with co-polar levels above cross-polar and a
propagation-delay phase.  The closed form is the oracle for
interpolation tests.

    |s21| dB = base(pol) - slope(pol) * (d_mm - 1) - tilt(pol) * (f_GHz - 30)
    arg s21  = -2*pi*f*d/c0
    |s11| dB = -15 + 0.04 * (f_GHz - 30),   |s22| 0.5 dB below s11

Separations cover 1 to 41 mm in 1 mm steps; the grid spans 28 to 32 GHz
in 500 MHz steps.
"""

from __future__ import annotations

import argparse
import cmath
import math
from pathlib import Path

from .mimo import MANIFEST_HEADER
from .touchstone import TwoPortSParams, serialize_touchstone

C0_M_PER_S = 299792458.0

CO_BASE_DB = -38.0
CO_SLOPE_DB_PER_MM = 0.55
CO_TILT_DB_PER_GHZ = 0.08
CROSS_BASE_DB = -44.0
CROSS_SLOPE_DB_PER_MM = 0.60
CROSS_TILT_DB_PER_GHZ = 0.10

DEFAULT_SEPARATIONS_MM = tuple(range(1, 42))
DEFAULT_FREQ_GRID_HZ = tuple(
    28_000_000_000 + 500_000_000 * k for k in range(9)
)


def coupling_model(
    f_hz: int, separation_mm: float, pol: str
) -> tuple[complex, complex, complex, complex]:
    """Closed-form (s11, s21, s12, s22) for one frequency and separation."""
    f_ghz = f_hz / 1e9
    if pol == "co":
        db = (
            CO_BASE_DB
            - CO_SLOPE_DB_PER_MM * (separation_mm - 1.0)
            - CO_TILT_DB_PER_GHZ * (f_ghz - 30.0)
        )
    elif pol == "cross":
        db = (
            CROSS_BASE_DB
            - CROSS_SLOPE_DB_PER_MM * (separation_mm - 1.0)
            - CROSS_TILT_DB_PER_GHZ * (f_ghz - 30.0)
        )
    else:
        raise ValueError(f"unknown polarization {pol!r}")
    delay_phase = -2.0 * math.pi * f_hz * (separation_mm * 1e-3) / C0_M_PER_S
    s21 = cmath.rect(10.0 ** (db / 20.0), delay_phase)
    s11_db = -15.0 + 0.04 * (f_ghz - 30.0)
    s11 = cmath.rect(10.0 ** (s11_db / 20.0), 0.3 * (f_ghz - 28.0))
    s22 = cmath.rect(10.0 ** ((s11_db - 0.5) / 20.0), 0.25 * (f_ghz - 28.0))
    return (s11, s21, s21, s22)


def make_record(
    separation_mm: float,
    pol: str,
    freq_grid_hz: tuple[int, ...] = DEFAULT_FREQ_GRID_HZ,
) -> TwoPortSParams:
    cols: tuple[list[complex], ...] = ([], [], [], [])
    for f in freq_grid_hz:
        vals = coupling_model(f, separation_mm, pol)
        for col, v in zip(cols, vals):
            col.append(v)
    return TwoPortSParams(
        freq_grid_hz=freq_grid_hz,
        s11=tuple(cols[0]),
        s21=tuple(cols[1]),
        s12=tuple(cols[2]),
        s22=tuple(cols[3]),
    )


def write_dataset(
    out_dir,
    separations_mm: tuple[int, ...] = DEFAULT_SEPARATIONS_MM,
    freq_grid_hz: tuple[int, ...] = DEFAULT_FREQ_GRID_HZ,
) -> Path:
    """Write one .s2p per (separation, polarization) plus manifest.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = [MANIFEST_HEADER]
    for pol in ("co", "cross"):
        for mm in separations_mm:
            fname = f"{pol}_{int(mm):02d}mm.s2p"
            sp = make_record(float(mm), pol, freq_grid_hz)
            (out / fname).write_text(serialize_touchstone(sp), encoding="utf-8")
            manifest.append(f"{fname},{int(mm)},{pol}")
    manifest_path = out / "manifest.csv"
    manifest_path.write_text("\n".join(manifest) + "\n", encoding="utf-8")
    return manifest_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m spurline.synth",
        description="Regenerate the synthetic antenna-coupling dataset.",
    )
    parser.add_argument("out_dir", help="directory for manifest.csv and .s2p files")
    args = parser.parse_args(argv)
    manifest = write_dataset(args.out_dir)
    print(f"wrote {manifest}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
