# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled interval bound kernels (see ``_pykernels`` for the reference)."""

cdef extern from *:
    """
    static inline int mf_add_ovf(long long a, long long b, long long *r) {
        return __builtin_add_overflow(a, b, r);
    }
    static inline int mf_mul_ovf(long long a, long long b, long long *r) {
        return __builtin_mul_overflow(a, b, r);
    }
    """
    int mf_add_ovf(long long a, long long b, long long *r) nogil
    int mf_mul_ovf(long long a, long long b, long long *r) nogil

cdef long long _NEG = -9223372036854775807LL - 1
cdef long long _POS = 9223372036854775807LL

NEG_INF = _NEG
POS_INF = _POS


cdef inline long long _add(long long a, long long b, bint up) nogil:
    cdef long long r
    if a == _NEG or b == _NEG:
        if a == _POS or b == _POS:
            return _POS if up else _NEG
        return _NEG
    if a == _POS or b == _POS:
        return _POS
    if mf_add_ovf(a, b, &r):
        return _POS if a > 0 else _NEG
    return r


cdef inline long long _neg(long long a) nogil:
    if a == _NEG:
        return _POS
    if a == _POS:
        return _NEG
    return -a


cdef inline long long _mul(long long a, long long b) nogil:
    cdef long long r
    if a == 0 or b == 0:
        return 0
    if a == _NEG or a == _POS or b == _NEG or b == _POS:
        return _POS if (a > 0) == (b > 0) else _NEG
    if mf_mul_ovf(a, b, &r):
        return _POS if (a > 0) == (b > 0) else _NEG
    return r


cpdef long long clamp(object v):
    if v <= _NEG:
        return _NEG
    if v >= _POS:
        return _POS
    return v


cpdef long long add_bound(long long a, long long b, bint up):
    return _add(a, b, up)


cpdef long long neg_bound(long long a):
    return _neg(a)


cpdef long long mul_bound(long long a, long long b):
    return _mul(a, b)


cpdef tuple itv_add(long long al, long long ah, long long bl, long long bh):
    return _add(al, bl, False), _add(ah, bh, True)


cpdef tuple itv_neg(long long al, long long ah):
    return _neg(ah), _neg(al)


cpdef tuple itv_sub(long long al, long long ah, long long bl, long long bh):
    return _add(al, _neg(bh), False), _add(ah, _neg(bl), True)


cpdef tuple itv_mul(long long al, long long ah, long long bl, long long bh):
    cdef long long p1 = _mul(al, bl)
    cdef long long p2 = _mul(al, bh)
    cdef long long p3 = _mul(ah, bl)
    cdef long long p4 = _mul(ah, bh)
    cdef long long lo = p1
    cdef long long hi = p1
    if p2 < lo: lo = p2
    if p3 < lo: lo = p3
    if p4 < lo: lo = p4
    if p2 > hi: hi = p2
    if p3 > hi: hi = p3
    if p4 > hi: hi = p4
    return lo, hi


cpdef bint itv_leq(long long al, long long ah, long long bl, long long bh):
    return bl <= al and ah <= bh


cpdef tuple itv_join(long long al, long long ah, long long bl, long long bh):
    return (al if al < bl else bl), (ah if ah > bh else bh)


cpdef object itv_meet(long long al, long long ah, long long bl, long long bh):
    cdef long long lo = al if al > bl else bl
    cdef long long hi = ah if ah < bh else bh
    if lo > hi:
        return None
    return lo, hi


cpdef tuple itv_widen(long long al, long long ah, long long bl, long long bh):
    return (al if al <= bl else _NEG), (ah if ah >= bh else _POS)


cpdef object itv_narrow(long long al, long long ah, long long bl, long long bh):
    cdef long long lo = bl if al == _NEG else al
    cdef long long hi = bh if ah == _POS else ah
    if lo > hi:
        return None
    return lo, hi


cpdef tuple itv_widen_thresholds(long long al, long long ah, long long bl,
                                 long long bh, tuple thresholds):
    cdef long long lo = al
    cdef long long hi = ah
    cdef long long t
    if bl < al:
        lo = _NEG
        for obj in thresholds:
            t = obj
            if t <= bl:
                lo = t
            else:
                break
    if bh > ah:
        hi = _POS
        for obj in thresholds:
            t = obj
            if t >= bh:
                hi = t
                break
    return lo, hi


cpdef long long c_add(long long a, long long b):
    return _add(a, b, True)


cpdef long long c_sub(long long a, long long b):
    return _add(a, _neg(b), True)


cpdef long long c_mul(long long a, long long b):
    return _mul(a, b)
