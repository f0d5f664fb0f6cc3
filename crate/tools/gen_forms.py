#!/usr/bin/env python3
"""Derive cyclic correlation bilinear forms over GF(2) and write them as form files.

Each form computes F_j = sum_s b_{(j+s) mod n} f_s as Q((R b) * (P f)).
Forms are assembled by the Chinese remainder theorem over the factors of
x^n + 1. Powers of (x + 1) use a truncated-product algorithm in y = x + 1 so
that every product against the y^0 residue of b (the trace) has an all-one R
row. Irreducible factors use Karatsuba products followed by reduction.

Usage: gen_forms.py OUT_DIR [LENGTH ...]
"""
import itertools
import os
import sys


def pdeg(p):
    return p.bit_length() - 1


def pmod(a, m):
    dm = pdeg(m)
    while a and pdeg(a) >= dm:
        a ^= m << (pdeg(a) - dm)
    return a


def pmul(a, b):
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def pdivmod(a, b):
    q = 0
    while a and pdeg(a) >= pdeg(b):
        s = pdeg(a) - pdeg(b)
        q ^= 1 << s
        a ^= b << s
    return q, a


def pinv(a, m):
    # extended Euclid over GF(2)[x]
    r0, r1, s0, s1 = m, pmod(a, m), 0, 1
    while r1 != 1:
        q, r = pdivmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 ^ pmul(q, s1)
    return pmod(s1, m)


def irreducible(p):
    d = pdeg(p)
    for q in range(2, 1 << (d // 2 + 1)):
        if pdeg(q) >= 1 and pdeg(q) <= d // 2 and pmod(p, q) == 0:
            return False
    return True


def factor(p):
    """Factor into (irreducible, multiplicity) pairs."""
    out = []
    q = 2
    while pdeg(p) > 0:
        if irreducible(q) and pdeg(q) >= 1:
            e = 0
            while pdeg(p) >= pdeg(q) and pmod(p, q) == 0:
                p = pdivmod(p, q)[0]
                e += 1
            if e:
                out.append((q, e))
        q += 1
    return out


# A bilinear algorithm is (U, V, W): z = W (U a * V x), U/V are t x la / t x lx,
# W is lz x t, all as lists of 0/1 lists.

def karatsuba(d):
    """Full product of two d-term polynomials."""
    if d == 1:
        return [[1]], [[1]], [[1]]
    if d == 3:
        U = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0], [1, 0, 1], [0, 1, 1]]
        W = [
            [1, 0, 0, 0, 0, 0],
            [1, 1, 0, 1, 0, 0],
            [1, 1, 1, 0, 1, 0],
            [0, 1, 1, 0, 0, 1],
            [0, 0, 1, 0, 0, 0],
        ]
        return U, [row[:] for row in U], W
    h = (d + 1) // 2
    lo = karatsuba(h)
    hi = karatsuba(d - h)
    mid = karatsuba(h)
    U, V, W = [], [], [[0] * 0 for _ in range(2 * d - 1)]
    cols = []

    def add_block(alg, amap, shifts):
        u, v, w = alg
        base = len(U)
        for row in u:
            U.append(amap(row))
        for row in v:
            V.append(amap(row))
        for k in range(len(u)):
            col = [0] * (2 * d - 1)
            for i in range(len(w)):
                if w[i][k]:
                    for s in shifts:
                        col[i + s] ^= 1
            cols.append(col)

    def lo_map(row):
        return row + [0] * (d - h)

    def hi_map(row):
        return [0] * h + row

    def mid_map(row):
        r = row + [0] * (d - h)
        for i in range(d - h):
            r[h + i] ^= row[i]
        return r

    # a0 b0 contributes at 0 and h, a1 b1 at 2h and h, (a0+a1)(b0+b1) at h
    add_block(lo, lo_map, [0, h])
    add_block(hi, hi_map, [2 * h, h])
    add_block(mid, mid_map, [h])
    W = [[cols[k][i] for k in range(len(cols))] for i in range(2 * d - 1)]
    return U, V, W


def truncated(L):
    """Lowest L coefficients of the product of two L-term polynomials."""
    if L == 1:
        return [[1]], [[1]], [[1]]
    h = (L + 1) // 2
    full = karatsuba(h)
    cross = truncated(L - h)
    U, V, cols = [], [], []
    u, v, w = full
    for k in range(len(u)):
        U.append(u[k] + [0] * (L - h))
        V.append(v[k] + [0] * (L - h))
        col = [0] * L
        for i in range(len(w)):
            if w[i][k] and i < L:
                col[i] ^= 1
        cols.append(col)
    # a_lo * b_hi and a_hi * b_lo, both truncated to L - h, shifted by h
    cu, cv, cw = cross
    for swap in (False, True):
        for k in range(len(cu)):
            if not swap:
                U.append(cu[k] + [0] * h)
                V.append([0] * h + cv[k])
            else:
                U.append([0] * h + cu[k])
                V.append(cv[k] + [0] * h)
            col = [0] * L
            for i in range(len(cw)):
                if cw[i][k]:
                    col[h + i] ^= 1
            cols.append(col)
    W = [[cols[k][i] for k in range(len(cols))] for i in range(L)]
    return U, V, W


def residue_matrix(n, m):
    """Rows: coefficients of (x^t mod m) for t < n, transposed to deg(m) x n."""
    d = pdeg(m)
    cols = [pmod(1 << t, m) for t in range(n)]
    return [[(cols[t] >> i) & 1 for t in range(n)] for i in range(d)]


def matmul(A, B):
    return [[sum(A[i][k] & B[k][j] for k in range(len(B))) & 1 for j in range(len(B[0]))] for i in range(len(A))]


def binom_parity(t, k):
    return 1 if (t & k) == k else 0


def factor_algorithm(n, p, e):
    """Bilinear algorithm for the residue of a*x mod p^e, mapped from/to length-n vectors.

    Returns (U, V, Wres) with U, V acting on length-n coefficient vectors and
    Wres producing the residue (as coefficients mod p^e) of the product.
    """
    if p == 0b11:
        # y = x + 1; coefficient k of a(y + 1) mod y^e is sum_t C(t, k) a_t
        to_y = [[binom_parity(t, k) for t in range(n)] for k in range(e)]
        U, V, cols = [], [], []
        # trace products: A_0 * X_k for every k
        for k in range(e):
            U.append(to_y[0])
            V.append(to_y[k])
            col = [0] * e
            col[k] = 1
            cols.append(col)
        if e > 1:
            tu, tv, tw = truncated(e - 1)
            for k in range(len(tu)):
                U.append([sum(tu[k][i] & to_y[i + 1][t] for i in range(e - 1)) & 1 for t in range(n)])
                V.append([sum(tv[k][i] & to_y[i][t] for i in range(e - 1)) & 1 for t in range(n)])
                col = [0] * e
                for i in range(e - 1):
                    if tw[i][k]:
                        col[i + 1] ^= 1
                cols.append(col)
        # back from y-basis to x-basis: y^k = (x + 1)^k
        from_y = [[binom_parity(k, i) for k in range(e)] for i in range(e)]
        Wy = [[cols[k][i] for k in range(len(cols))] for i in range(e)]
        return U, V, matmul(from_y, Wy)
    assert e == 1
    d = pdeg(p)
    red = residue_matrix(n, p)
    ku, kv, kw = karatsuba(d)
    U = matmul(ku, red)
    V = matmul(kv, red)
    # product has 2d - 1 coefficients; reduce mod p
    reduce = residue_matrix(2 * d - 1, p)
    return U, V, matmul(reduce, kw)


def convolution_form(n):
    """Cyclic convolution z = a * x mod x^n + 1 as (Ra, Px, Q)."""
    M = (1 << n) | 1
    R, P, Qcols = [], [], []
    for (p, e) in factor(M):
        pe = 1
        for _ in range(e):
            pe = pmul(pe, p)
        other = pdivmod(M, pe)[0]
        idem = pmod(pmul(other, pinv(other, pe)), M)
        U, V, W = factor_algorithm(n, p, e)
        d = pdeg(pe)
        # residue r(x) of degree < d contributes idem * r mod M
        lift = [[(pmod(pmul(idem, 1 << i), M) >> j) & 1 for i in range(d)] for j in range(n)]
        L = matmul(lift, W)
        R.extend(U)
        P.extend(V)
        for k in range(len(U)):
            Qcols.append([L[j][k] for j in range(n)])
    Q = [[Qcols[k][j] for k in range(len(Qcols))] for j in range(n)]
    return R, P, Q


def correlation_form(n):
    R, P, Q = convolution_form(n)
    # F_j = sum_s b_{j+s} f_s is the convolution of b with f reversed
    P = [[row[(-s) % n] for s in range(n)] for row in P]
    return P, R, Q


def mul_matrix(e, n):
    """Multiplication by e modulo x^n + 1 on coefficient vectors."""
    M = (1 << n) | 1
    return [[(pmod(pmul(e, 1 << j), M) >> i) & 1 for j in range(n)] for i in range(n)]


def unit_inverse(e, n):
    M = (1 << n) | 1
    return next(u for u in range(1, 1 << n) if pmod(pmul(e, u), M) == 1)


def reshape(n, P, R, Q, h=1, transpose=False):
    """An equivalent form with the same multiplications.

    Scaling the output by the unit h (and the constants by h^-1) keeps
    Q (c * P f) a correlation. Since the correlation matrix is symmetric,
    (Q^T, R, P^T) is a form as well.
    """
    if h != 1:
        R = matmul(R, mul_matrix(unit_inverse(h, n), n))
        Q = matmul(mul_matrix(h, n), Q)
    if transpose:
        P, Q = [list(r) for r in zip(*Q)], [list(r) for r in zip(*P)]
    return P, R, Q


# Equivalent variants that optimize to fewer additions in the transforms.
VARIANTS = {4: dict(transpose=True), 5: dict(h=0b111)}


def check(n, P, R, Q):
    t = len(P)
    for j in range(n):
        for s in range(n):
            for u in range(n):
                v = 0
                for k in range(t):
                    v ^= Q[j][k] & P[k][s] & R[k][u]
                if v != (1 if u == (j + s) % n else 0):
                    return False
    return True


def write(path, n, P, R, Q):
    t = len(P)
    with open(path, "w") as fh:
        fh.write("cyclic %d %d\n" % (n, t))
        for row in P:
            fh.write("".join(map(str, row)) + "\n")
        for row in R:
            fh.write("".join(map(str, row)) + "\n")
        for row in Q:
            fh.write("".join(map(str, row)) + "\n")


def main():
    out = sys.argv[1]
    lengths = [int(x) for x in sys.argv[2:]] or [4, 5, 7, 8, 9]
    os.makedirs(out, exist_ok=True)
    for n in lengths:
        P, R, Q = reshape(n, *correlation_form(n), **VARIANTS.get(n, {}))
        assert check(n, P, R, Q), n
        ones = sum(1 for row in R if all(row))
        w = sum(map(sum, P)) + sum(map(sum, Q))
        print("length %d: t=%d, mult=%d, weight(P)+weight(Q)=%d" % (n, len(P), len(P) - ones, w))
        write(os.path.join(out, "cyclic_%d.txt" % n), n, P, R, Q)


if __name__ == "__main__":
    main()
