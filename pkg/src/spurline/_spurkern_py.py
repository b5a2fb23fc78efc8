"""Pure-Python plan-evaluation kernel.

Reference implementation of the hot loop behind plan grid searches; the
compiled twin in ``_spurkern.pyx`` must match it bit for bit.  For each
candidate plan (f_if, f_lo_tx, f_lo_rx) it enumerates every spur path
|n*f_if +/- m_tx*f_lo_tx| -> |f +/- m_rx*f_lo_rx| and accumulates three
metrics: collisions with the desired receive IF, the worst in-band spur
level, and sub-Nyquist alias violations.  All frequency math is exact
integer arithmetic.
"""

from __future__ import annotations

import math


def plan_metrics_into(
    f_if, f_lo_tx, f_lo_rx,
    usb, n_max, m_max,
    tx_rej, rx_rej,
    band_lo, band_hi,
    fs, guard,
    out_deg, out_worst, out_viol,
):
    """Fill the three output arrays, one slot per candidate plan.

    tx_rej is the dense (n_max+1)*(m_max+1) rejection table flattened
    row-major; rx_rej[m] is the receive-side (1, m) rejection.  fs == 0
    disables the alias check.  The desired path (n=1, m_tx per sideband,
    m_rx=-1) is skipped; zero-frequency intermediates and products are
    discarded, mirroring the mixer model.
    """
    n_plans = len(f_if)
    mw = int(m_max) + 1
    tx = [float(v) for v in tx_rej]
    rx_tab = [float(v) for v in rx_rej]
    band_lo = int(band_lo)
    band_hi = int(band_hi)
    fs = int(fs)
    guard = int(guard)
    des_mt = 1 if usb else -1
    neg_inf = -math.inf

    for p in range(n_plans):
        fi = int(f_if[p])
        lt = int(f_lo_tx[p])
        lr = int(f_lo_rx[p])
        up_des = lt + fi if usb else abs(lt - fi)
        des = abs(up_des - lr)
        if fs > 0:
            r = des % fs
            des_alias = r if r < fs - r else fs - r
        else:
            des_alias = 0
        deg = 0
        viol = 0
        worst = neg_inf
        for n in range(1, int(n_max) + 1):
            nf = n * fi
            for mt in range(-int(m_max), int(m_max) + 1):
                if mt == 0:
                    continue
                up = abs(nf + mt * lt)
                if up == 0:
                    continue
                amt = -mt if mt < 0 else mt
                tx_level = tx[n * mw + amt]
                for mr in range(-int(m_max), int(m_max) + 1):
                    if mr == 0:
                        continue
                    if n == 1 and mt == des_mt and mr == -1:
                        continue
                    rx = abs(up + mr * lr)
                    if rx == 0:
                        continue
                    if rx == des:
                        deg += 1
                    amr = -mr if mr < 0 else mr
                    level = tx_level + rx_tab[amr]
                    if band_lo <= rx <= band_hi and level > worst:
                        worst = level
                    if fs > 0:
                        r = rx % fs
                        a = r if r < fs - r else fs - r
                        d = a - des_alias
                        if d < 0:
                            d = -d
                        if d <= guard:
                            viol += 1
        out_deg[p] = deg
        out_worst[p] = worst
        out_viol[p] = viol
