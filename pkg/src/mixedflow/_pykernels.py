"""Pure-Python interval bound kernels.

Drop-in fallback for the compiled ``_kernels`` extension; both expose the
same functions with identical results. Bounds are plain ints in the signed
64-bit range where the two extreme values act as -inf / +inf.
"""

NEG_INF = -(2**63)
POS_INF = 2**63 - 1


def clamp(v):
    if v <= NEG_INF:
        return NEG_INF
    if v >= POS_INF:
        return POS_INF
    return v


def add_bound(a, b, up):
    if a == NEG_INF or b == NEG_INF:
        if a == POS_INF or b == POS_INF:
            return POS_INF if up else NEG_INF
        return NEG_INF
    if a == POS_INF or b == POS_INF:
        return POS_INF
    return clamp(a + b)


def neg_bound(a):
    if a == NEG_INF:
        return POS_INF
    if a == POS_INF:
        return NEG_INF
    return clamp(-a)


def mul_bound(a, b):
    if a == 0 or b == 0:
        return 0
    if a in (NEG_INF, POS_INF) or b in (NEG_INF, POS_INF):
        return POS_INF if (a > 0) == (b > 0) else NEG_INF
    return clamp(a * b)


def itv_add(al, ah, bl, bh):
    return add_bound(al, bl, False), add_bound(ah, bh, True)


def itv_neg(al, ah):
    return neg_bound(ah), neg_bound(al)


def itv_sub(al, ah, bl, bh):
    return add_bound(al, neg_bound(bh), False), add_bound(ah, neg_bound(bl), True)


def itv_mul(al, ah, bl, bh):
    p1 = mul_bound(al, bl)
    p2 = mul_bound(al, bh)
    p3 = mul_bound(ah, bl)
    p4 = mul_bound(ah, bh)
    return min(p1, p2, p3, p4), max(p1, p2, p3, p4)


def itv_leq(al, ah, bl, bh):
    return bl <= al and ah <= bh


def itv_join(al, ah, bl, bh):
    return (al if al < bl else bl), (ah if ah > bh else bh)


def itv_meet(al, ah, bl, bh):
    lo = al if al > bl else bl
    hi = ah if ah < bh else bh
    if lo > hi:
        return None
    return lo, hi


def itv_widen(al, ah, bl, bh):
    return (al if al <= bl else NEG_INF), (ah if ah >= bh else POS_INF)


def itv_narrow(al, ah, bl, bh):
    lo = bl if al == NEG_INF else al
    hi = bh if ah == POS_INF else ah
    if lo > hi:
        return None
    return lo, hi


def itv_widen_thresholds(al, ah, bl, bh, thresholds):
    """``thresholds`` is an ascending tuple containing both infinities."""
    lo = al
    if bl < al:
        lo = NEG_INF
        for t in thresholds:
            if t <= bl:
                lo = t
            else:
                break
    hi = ah
    if bh > ah:
        hi = POS_INF
        for t in thresholds:
            if t >= bh:
                hi = t
                break
    return lo, hi


def c_add(a, b):
    return add_bound(a, b, True)


def c_sub(a, b):
    return add_bound(a, neg_bound(b), True)


def c_mul(a, b):
    return mul_bound(a, b)
