# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twin of ``_core_py``.

Mantissas stay arbitrary-precision Python ints; the win over the pure
version comes from C-level loops, branches and tuple handling.
"""

KERNEL_NAME = "cython"


cdef inline object _bitlen(object m):
    return (m if m >= 0 else -m).bit_length()


def rnd_dn(m, e, prec):
    """Round man*2^exp toward -inf to at most prec mantissa bits."""
    cdef long s = <long>_bitlen(m) - <long>prec
    if s <= 0:
        return m, e
    return m >> s, e + s


def rnd_up(m, e, prec):
    """Round man*2^exp toward +inf to at most prec mantissa bits."""
    cdef long s = <long>_bitlen(m) - <long>prec
    if s <= 0:
        return m, e
    return -((-m) >> s), e + s


cdef inline int _cmp_be(object m1, long e1, object m2, long e2):
    cdef object d
    if m1 == 0 or m2 == 0 or (m1 < 0) != (m2 < 0):
        d = m1 if m2 == 0 else (-m2 if m1 == 0 else m1)
        return -1 if d < 0 else (1 if d > 0 else 0)
    if e1 >= e2:
        d = (m1 << (e1 - e2)) - m2
    else:
        d = m1 - (m2 << (e2 - e1))
    return -1 if d < 0 else (1 if d > 0 else 0)


def be_cmp(m1, e1, m2, e2):
    """Compare two dyadic bounds; returns -1, 0 or 1."""
    return _cmp_be(m1, <long>e1, m2, <long>e2)


cdef inline tuple _add(tuple a, tuple b, long prec):
    cdef object lm1, hm1, lm2, hm2, lm, hm
    cdef long le1, he1, le2, he2, le, he, s
    lm1 = a[0]; le1 = <long>a[1]; hm1 = a[2]; he1 = <long>a[3]
    lm2 = b[0]; le2 = <long>b[1]; hm2 = b[2]; he2 = <long>b[3]
    if le1 >= le2:
        lm = (lm1 << (le1 - le2)) + lm2; le = le2
    else:
        lm = lm1 + (lm2 << (le2 - le1)); le = le1
    if he1 >= he2:
        hm = (hm1 << (he1 - he2)) + hm2; he = he2
    else:
        hm = hm1 + (hm2 << (he2 - he1)); he = he1
    s = <long>_bitlen(lm) - prec
    if s > 0:
        lm = lm >> s; le += s
    s = <long>_bitlen(hm) - prec
    if s > 0:
        hm = -((-hm) >> s); he += s
    return (lm, le, hm, he)


cdef inline tuple _mul(tuple a, tuple b, long prec):
    cdef object lm1, hm1, lm2, hm2, lm, hm, m
    cdef long le1, he1, le2, he2, le, he, e, s, i
    lm1 = a[0]; le1 = <long>a[1]; hm1 = a[2]; he1 = <long>a[3]
    lm2 = b[0]; le2 = <long>b[1]; hm2 = b[2]; he2 = <long>b[3]
    if lm1 >= 0 and lm2 >= 0:
        lm = lm1 * lm2; le = le1 + le2; hm = hm1 * hm2; he = he1 + he2
    elif hm1 <= 0 and hm2 <= 0:
        lm = hm1 * hm2; le = he1 + he2; hm = lm1 * lm2; he = le1 + le2
    elif lm1 >= 0 and hm2 <= 0:
        lm = hm1 * lm2; le = he1 + le2; hm = lm1 * hm2; he = le1 + he2
    elif hm1 <= 0 and lm2 >= 0:
        lm = lm1 * hm2; le = le1 + he2; hm = hm1 * lm2; he = he1 + le2
    else:
        lm = lm1 * lm2; le = le1 + le2
        hm = lm; he = le
        for i in range(3):
            if i == 0:
                m = lm1 * hm2; e = le1 + he2
            elif i == 1:
                m = hm1 * lm2; e = he1 + le2
            else:
                m = hm1 * hm2; e = he1 + he2
            if _cmp_be(m, e, lm, le) < 0:
                lm = m; le = e
            if _cmp_be(m, e, hm, he) > 0:
                hm = m; he = e
    s = <long>_bitlen(lm) - prec
    if s > 0:
        lm = lm >> s; le += s
    s = <long>_bitlen(hm) - prec
    if s > 0:
        hm = -((-hm) >> s); he += s
    return (lm, le, hm, he)


def iv_add(a, b, prec):
    return _add(tuple(a), tuple(b), <long>prec)


def iv_neg(a):
    lm, le, hm, he = a
    return (-hm, he, -lm, le)


def iv_sub(a, b, prec):
    lm, le, hm, he = b
    return _add(tuple(a), (-hm, he, -lm, le), <long>prec)


def iv_mul(a, b, prec):
    return _mul(tuple(a), tuple(b), <long>prec)


def iv_scale2(a, k):
    """Exact multiplication by 2**k."""
    lm, le, hm, he = a
    return (lm, le + k, hm, he + k)


def iv_dot(avec, bvec, prec):
    """Sum of pairwise products of two equal-length interval sequences."""
    cdef long p = <long>prec
    cdef long i, n = len(avec)
    cdef tuple acc = (0, 0, 0, 0)
    for i in range(n):
        acc = _add(acc, _mul(tuple(avec[i]), tuple(bvec[i]), p), p)
    return acc


def iv_matvec(mat, vec, n, m, prec):
    """mat is row-major flat list of n*m intervals; returns list of n."""
    cdef long p = <long>prec
    cdef long nn = <long>n, mm = <long>m
    cdef long i, j, base
    cdef tuple acc
    cdef list out = [], v = [tuple(x) for x in vec], mt = [tuple(x) for x in mat]
    for i in range(nn):
        acc = (0, 0, 0, 0)
        base = i * mm
        for j in range(mm):
            acc = _add(acc, _mul(<tuple>mt[base + j], <tuple>v[j], p), p)
        out.append(acc)
    return out


def iv_poly(coeffs, x, prec):
    """Evaluate sum(coeffs[i] * x**i) by Horner; coeffs are intervals."""
    cdef long p = <long>prec
    cdef list cs = [tuple(c) for c in coeffs]
    cdef tuple xx = tuple(x)
    cdef long k = len(cs) - 1
    cdef tuple acc = <tuple>cs[k]
    while k > 0:
        k -= 1
        acc = _add(_mul(acc, xx, p), <tuple>cs[k], p)
    return acc


def run_schedule(emat, gs, picks, n, prec):
    """Iterate x <- E x + gs[picks[k]] from x = 0; see the pure twin."""
    cdef long p = <long>prec
    cdef long nn = <long>n
    cdef long i, j, base, pk
    cdef list em = [tuple(x) for x in emat]
    cdef list gg = [[tuple(x) for x in g] for g in gs]
    cdef list x = [(0, 0, 0, 0)] * nn, nx, g
    cdef tuple acc
    for pk in picks:
        g = <list>gg[pk]
        nx = []
        for i in range(nn):
            acc = <tuple>g[i]
            base = i * nn
            for j in range(nn):
                acc = _add(acc, _mul(<tuple>em[base + j], <tuple>x[j], p), p)
            nx.append(acc)
        x = nx
    return x
