#!/usr/bin/env python3
"""Generate the BCH parity-check matrix files under data/.

Builds narrow-sense primitive BCH codes from their generator polynomials,
then writes two parity-check matrix styles in alist format:

  *_rr.alist  right-regular: cyclic shifts of the reciprocal parity
              polynomial, so every row has the same weight
  *_cr.alist  cycle-reduced: greedy row-XOR hill climb that minimizes the
              number of length-4 cycles (ties broken by total weight)

Row operations preserve the row space, so both variants check the same
code. The script is deterministic; the committed data files are its
output.

Usage: python3 tools/make_bch_matrices.py [outdir]
"""

import sys


def poly_mul(a, b):
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_divmod(a, b):
    deg_b = b.bit_length() - 1
    q = 0
    while a.bit_length() - 1 >= deg_b and a:
        shift = a.bit_length() - 1 - deg_b
        q ^= 1 << shift
        a ^= b << shift
    return q, a


class GF2m:
    def __init__(self, m, prim_poly):
        self.m = m
        self.size = 1 << m
        self.exp = [0] * (self.size - 1)
        self.log = [0] * self.size
        x = 1
        for i in range(self.size - 1):
            self.exp[i] = x
            self.log[x] = i
            x <<= 1
            if x & self.size:
                x ^= prim_poly

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return self.exp[(self.log[a] + self.log[b]) % (self.size - 1)]


def minimal_polynomial(field, n, exponent):
    coset = set()
    e = exponent % n
    while e not in coset:
        coset.add(e)
        e = (2 * e) % n
    # prod over the coset of (X + alpha^j), coefficients as field elements
    poly = [1]  # constant 1, will become monic of degree |coset|
    for j in sorted(coset):
        root = field.exp[j % (field.size - 1)]
        # poly(X) * (X + root)
        new = [0] * (len(poly) + 1)
        for d, c in enumerate(poly):
            new[d + 1] ^= c
            new[d] ^= field.mul(c, root)
        poly = new
    out = 0
    for d, c in enumerate(poly):
        assert c in (0, 1), "minimal polynomial not binary"
        if c:
            out |= 1 << d
    return out


def bch_generator(field, n, designed_t):
    # lcm of the minimal polynomials of alpha^1 .. alpha^(2t)
    g = 1
    for i in range(1, 2 * designed_t + 1):
        mp = minimal_polynomial(field, n, i)
        if poly_divmod(g, mp)[1] != 0:
            g = poly_mul(g, mp)
    return g


def popcount_rows(rows):
    return sum(bin(r).count("1") for r in rows)


def count_4cycles(rows):
    total = 0
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            o = bin(rows[i] & rows[j]).count("1")
            total += o * (o - 1) // 2
    return total


def cycle_reduce(rows):
    rows = list(rows)
    m = len(rows)
    best_cycles = count_4cycles(rows)
    best_ones = popcount_rows(rows)
    improved = True
    passes = 0
    while improved and passes < 60:
        improved = False
        passes += 1
        for i in range(m):
            for j in range(m):
                if i == j:
                    continue
                cand = rows[i] ^ rows[j]
                old = rows[i]
                rows[i] = cand
                cycles = count_4cycles(rows)
                ones = popcount_rows(rows)
                if (cycles, ones) < (best_cycles, best_ones):
                    best_cycles, best_ones = cycles, ones
                    improved = True
                else:
                    rows[i] = old
    return rows, best_cycles


def gf2_rank(rows, n):
    rows = list(rows)
    rank = 0
    for col in range(n):
        mask = 1 << col
        pivot = None
        for r in range(rank, len(rows)):
            if rows[r] & mask:
                pivot = r
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r] & mask:
                rows[r] ^= rows[rank]
        rank += 1
    return rank


def write_alist(path, rows, n):
    m = len(rows)
    cols = [[r + 1 for r in range(m) if rows[r] >> c & 1] for c in range(n)]
    rlist = [[c + 1 for c in range(n) if rows[r] >> c & 1] for r in range(m)]
    with open(path, "w") as f:
        f.write(f"{n} {m}\n")
        f.write(f"{max(len(c) for c in cols)} {max(len(r) for r in rlist)}\n")
        f.write(" ".join(str(len(c)) for c in cols) + "\n")
        f.write(" ".join(str(len(r)) for r in rlist) + "\n")
        for c in cols:
            f.write(" ".join(str(x) for x in c) + "\n")
        for r in rlist:
            f.write(" ".join(str(x) for x in r) + "\n")


def build_code(m, prim_poly, n, k, designed_t, outdir, stem, want_rr):
    field = GF2m(m, prim_poly)
    g = bch_generator(field, n, designed_t)
    deg_g = g.bit_length() - 1
    assert deg_g == n - k, f"generator degree {deg_g}, expected {n - k}"
    h, rem = poly_divmod((1 << n) | 1, g)
    assert rem == 0
    # reciprocal of h, degree k
    h_rev = int(bin(h)[2:][::-1], 2) if h else 0
    assert h_rev.bit_length() - 1 == k

    rows_rr = [h_rev << i for i in range(n - k)]
    assert all(r < (1 << n) for r in rows_rr)
    assert gf2_rank(rows_rr, n) == n - k

    # sanity: every generator-row codeword passes every check
    gen_rows = [g << i for i in range(k)]
    for gr in gen_rows:
        for hr in rows_rr:
            assert bin(gr & hr).count("1") % 2 == 0

    if want_rr:
        write_alist(f"{outdir}/{stem}_rr.alist", rows_rr, n)
        print(f"{stem}_rr: {n - k} x {n}, row weight {bin(h_rev).count('1')}, "
              f"4-cycles {count_4cycles(rows_rr)}")

    rows_cr, cycles = cycle_reduce(rows_rr)
    assert gf2_rank(rows_cr, n) == n - k
    for gr in gen_rows:
        for hr in rows_cr:
            assert bin(gr & hr).count("1") % 2 == 0
    write_alist(f"{outdir}/{stem}_cr.alist", rows_cr, n)
    weights = sorted(bin(r).count("1") for r in rows_cr)
    print(f"{stem}_cr: {n - k} x {n}, row weights {weights[0]}..{weights[-1]}, "
          f"4-cycles {cycles}")


def main():
    outdir = sys.argv[1] if len(sys.argv) > 1 else "data"
    build_code(m=6, prim_poly=0b1000011, n=63, k=36, designed_t=5,
               outdir=outdir, stem="bch_63_36", want_rr=True)
    build_code(m=7, prim_poly=0b10001001, n=127, k=64, designed_t=10,
               outdir=outdir, stem="bch_127_64", want_rr=False)


if __name__ == "__main__":
    main()
