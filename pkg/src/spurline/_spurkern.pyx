# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: cdivision=True
"""Compiled plan-evaluation kernel.

Twin of ``_spurkern_py``; see that module for the semantics.  Operands
are non-negative wherever ``%`` is used, so C division semantics match
Python's.
"""

from libc.math cimport INFINITY


cdef inline long long _llabs(long long x) noexcept nogil:
    return -x if x < 0 else x


def plan_metrics_into(
    const long long[::1] f_if,
    const long long[::1] f_lo_tx,
    const long long[::1] f_lo_rx,
    int usb,
    int n_max,
    int m_max,
    const double[::1] tx_rej,
    const double[::1] rx_rej,
    long long band_lo,
    long long band_hi,
    long long fs,
    long long guard,
    long long[::1] out_deg,
    double[::1] out_worst,
    long long[::1] out_viol,
):
    cdef Py_ssize_t n_plans = f_if.shape[0]
    cdef Py_ssize_t p
    cdef long long fi, lt, lr, up_des, des, des_alias, up, rx, r, a, d
    cdef long long deg, viol
    cdef double worst, level, tx_level
    cdef int n, mt, mr, amt, amr
    cdef int mw = m_max + 1
    cdef int des_mt = 1 if usb else -1

    with nogil:
        for p in range(n_plans):
            fi = f_if[p]
            lt = f_lo_tx[p]
            lr = f_lo_rx[p]
            up_des = lt + fi if usb else _llabs(lt - fi)
            des = _llabs(up_des - lr)
            des_alias = 0
            if fs > 0:
                r = des % fs
                des_alias = r if r < fs - r else fs - r
            deg = 0
            viol = 0
            worst = -INFINITY
            for n in range(1, n_max + 1):
                for mt in range(-m_max, m_max + 1):
                    if mt == 0:
                        continue
                    up = _llabs(n * fi + mt * lt)
                    if up == 0:
                        continue
                    amt = -mt if mt < 0 else mt
                    tx_level = tx_rej[n * mw + amt]
                    for mr in range(-m_max, m_max + 1):
                        if mr == 0:
                            continue
                        if n == 1 and mt == des_mt and mr == -1:
                            continue
                        rx = _llabs(up + mr * lr)
                        if rx == 0:
                            continue
                        if rx == des:
                            deg += 1
                        amr = -mr if mr < 0 else mr
                        level = tx_level + rx_rej[amr]
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
