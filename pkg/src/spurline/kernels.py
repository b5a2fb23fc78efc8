"""Kernel backend selection and the array-facing wrapper.

The compiled extension is preferred when it imported cleanly; the
pure-Python module is the fallback.  ``SPURLINE_KERNELS`` overrides the
choice: ``auto`` (default), ``compiled`` (fail hard if the extension is
missing), or ``pure``.  ``BACKEND`` records what was picked at import
time.
"""

from __future__ import annotations

import os

import numpy as np

from . import _spurkern_py

_VALID = ("auto", "compiled", "pure")
_choice = os.environ.get("SPURLINE_KERNELS", "auto").strip().lower()
if _choice not in _VALID:
    raise RuntimeError(
        f"SPURLINE_KERNELS must be one of {_VALID}, got {_choice!r}"
    )

_impl = None
BACKEND = "pure"
if _choice in ("auto", "compiled"):
    try:
        from . import _spurkern as _compiled
    except ImportError:
        if _choice == "compiled":
            raise
    else:
        _impl = _compiled
        BACKEND = "compiled"
if _impl is None:
    _impl = _spurkern_py


def backend_name() -> str:
    return BACKEND


def get_impl(name: str):
    """Return a specific backend module, for benchmarks and tests."""
    if name == "pure":
        return _spurkern_py
    if name == "compiled":
        from . import _spurkern

        return _spurkern
    raise ValueError(f"unknown kernel backend {name!r}")


def plan_metrics(
    f_if,
    f_lo_tx,
    f_lo_rx,
    *,
    usb: bool,
    n_max: int,
    m_max: int,
    tx_rej,
    rx_rej,
    band_lo: int,
    band_hi: int,
    fs: int = 0,
    guard: int = 0,
    impl=None,
):
    """Evaluate the spur metrics for a batch of candidate plans.

    Returns (degenerate_count, worst_inband_dbc, alias_violations) as
    int64/float64/int64 arrays aligned with the inputs.
    """
    f_if = np.ascontiguousarray(f_if, dtype=np.int64)
    f_lo_tx = np.ascontiguousarray(f_lo_tx, dtype=np.int64)
    f_lo_rx = np.ascontiguousarray(f_lo_rx, dtype=np.int64)
    if not (f_if.shape == f_lo_tx.shape == f_lo_rx.shape):
        raise ValueError("plan arrays must have equal length")
    tx_rej = np.ascontiguousarray(tx_rej, dtype=np.float64)
    rx_rej = np.ascontiguousarray(rx_rej, dtype=np.float64)
    if tx_rej.size != (n_max + 1) * (m_max + 1):
        raise ValueError("tx_rej must be a flat (n_max+1)*(m_max+1) table")
    if rx_rej.size != m_max + 1:
        raise ValueError("rx_rej must have m_max+1 entries")
    n = f_if.size
    out_deg = np.empty(n, dtype=np.int64)
    out_worst = np.empty(n, dtype=np.float64)
    out_viol = np.empty(n, dtype=np.int64)
    mod = impl if impl is not None else _impl
    mod.plan_metrics_into(
        f_if, f_lo_tx, f_lo_rx,
        1 if usb else 0, int(n_max), int(m_max),
        tx_rej, rx_rej,
        int(band_lo), int(band_hi),
        int(fs), int(guard),
        out_deg, out_worst, out_viol,
    )
    return out_deg, out_worst, out_viol
