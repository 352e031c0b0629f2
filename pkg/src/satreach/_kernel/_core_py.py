"""Pure-Python twin of the compiled interval kernel.

Kept in lockstep with ``_core_c.pyx``: identical names, signatures and
rounding behaviour (tests/test_kernel.py cross-checks the two).
"""

KERNEL_NAME = "python"


def rnd_dn(m, e, prec):
    """Round man*2^exp toward -inf to at most prec mantissa bits."""
    s = (m if m >= 0 else -m).bit_length() - prec
    if s <= 0:
        return m, e
    return m >> s, e + s


def rnd_up(m, e, prec):
    """Round man*2^exp toward +inf to at most prec mantissa bits."""
    s = (m if m >= 0 else -m).bit_length() - prec
    if s <= 0:
        return m, e
    return -((-m) >> s), e + s


def be_cmp(m1, e1, m2, e2):
    """Compare two dyadic bounds; returns -1, 0 or 1."""
    if m1 == 0 or m2 == 0 or (m1 < 0) != (m2 < 0):
        d = m1 if m2 == 0 else (-m2 if m1 == 0 else m1)
        return -1 if d < 0 else (1 if d > 0 else 0)
    if e1 >= e2:
        d = (m1 << (e1 - e2)) - m2
    else:
        d = m1 - (m2 << (e2 - e1))
    return -1 if d < 0 else (1 if d > 0 else 0)


def iv_add(a, b, prec):
    lm1, le1, hm1, he1 = a
    lm2, le2, hm2, he2 = b
    if le1 >= le2:
        lm, le = (lm1 << (le1 - le2)) + lm2, le2
    else:
        lm, le = lm1 + (lm2 << (le2 - le1)), le1
    if he1 >= he2:
        hm, he = (hm1 << (he1 - he2)) + hm2, he2
    else:
        hm, he = hm1 + (hm2 << (he2 - he1)), he1
    lm, le = rnd_dn(lm, le, prec)
    hm, he = rnd_up(hm, he, prec)
    return (lm, le, hm, he)


def iv_neg(a):
    lm, le, hm, he = a
    return (-hm, he, -lm, le)


def iv_sub(a, b, prec):
    return iv_add(a, iv_neg(b), prec)


def iv_mul(a, b, prec):
    lm1, le1, hm1, he1 = a
    lm2, le2, hm2, he2 = b
    # Sign-split fast paths; the general case compares all four products.
    if lm1 >= 0 and lm2 >= 0:
        lm, le, hm, he = lm1 * lm2, le1 + le2, hm1 * hm2, he1 + he2
    elif hm1 <= 0 and hm2 <= 0:
        lm, le, hm, he = hm1 * hm2, he1 + he2, lm1 * lm2, le1 + le2
    elif lm1 >= 0 and hm2 <= 0:
        lm, le, hm, he = hm1 * lm2, he1 + le2, lm1 * hm2, le1 + he2
    elif hm1 <= 0 and lm2 >= 0:
        lm, le, hm, he = lm1 * hm2, le1 + he2, hm1 * lm2, he1 + le2
    else:
        c = [
            (lm1 * lm2, le1 + le2),
            (lm1 * hm2, le1 + he2),
            (hm1 * lm2, he1 + le2),
            (hm1 * hm2, he1 + he2),
        ]
        lm, le = c[0]
        hm, he = c[0]
        for m, e in c[1:]:
            if be_cmp(m, e, lm, le) < 0:
                lm, le = m, e
            if be_cmp(m, e, hm, he) > 0:
                hm, he = m, e
    lm, le = rnd_dn(lm, le, prec)
    hm, he = rnd_up(hm, he, prec)
    return (lm, le, hm, he)


def iv_scale2(a, k):
    """Exact multiplication by 2**k."""
    lm, le, hm, he = a
    return (lm, le + k, hm, he + k)


def iv_dot(avec, bvec, prec):
    """Sum of pairwise products of two equal-length interval sequences."""
    acc = (0, 0, 0, 0)
    for i in range(len(avec)):
        acc = iv_add(acc, iv_mul(avec[i], bvec[i], prec), prec)
    return acc


def iv_matvec(mat, vec, n, m, prec):
    """mat is row-major flat list of n*m intervals; returns list of n."""
    out = []
    for i in range(n):
        acc = (0, 0, 0, 0)
        base = i * m
        for j in range(m):
            acc = iv_add(acc, iv_mul(mat[base + j], vec[j], prec), prec)
        out.append(acc)
    return out


def iv_poly(coeffs, x, prec):
    """Evaluate sum(coeffs[i] * x**i) by Horner; coeffs are intervals."""
    k = len(coeffs) - 1
    acc = coeffs[k]
    while k > 0:
        k -= 1
        acc = iv_add(iv_mul(acc, x, prec), coeffs[k], prec)
    return acc


def run_schedule(emat, gs, picks, n, prec):
    """Iterate x <- E x + gs[picks[k]] from x = 0.

    emat: flat n*n interval matrix; gs: tuple of interval n-vectors.
    Returns the endpoint as a list of n intervals.
    """
    x = [(0, 0, 0, 0)] * n
    for p in picks:
        g = gs[p]
        nx = []
        for i in range(n):
            acc = g[i]
            base = i * n
            for j in range(n):
                acc = iv_add(acc, iv_mul(emat[base + j], x[j], prec), prec)
            nx.append(acc)
        x = nx
    return x
