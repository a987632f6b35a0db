"""Slow, independent cross-check routines.

Each oracle recomputes a quantity that the main code paths produce,
using a deliberately different algorithm: the product oracle expands
its projection kernel monomial by monomial straight from the defining
double sum (no kernel-polynomial arithmetic, no closed forms), the
block oracle reads the structure of a twisted group algebra off its
full multiplication table, and the coset oracle counts dual-lattice
cosets by direct enumeration.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .fdist import FdistError, GenSeries, _residue, gen_binom
from .fock import FockOp, FockVector
from .linalg import field_inverse, lcm_list
from .scalar import ONE, as_scalar


class OracleError(Exception):
    pass


@dataclass
class OracleReport:
    identity: str
    instance: str
    main_value: object
    oracle_value: object
    agree: bool


def report(identity, instance, main_value, oracle_value) -> OracleReport:
    return OracleReport(identity, str(instance), main_value, oracle_value,
                        main_value == oracle_value)


def _floor_int(x: Fraction) -> int:
    return x.numerator // x.denominator


# ---------------------------------------------------------------------
# Residue-form product oracle
# ---------------------------------------------------------------------

def projection_monomials(p: int, m: int):
    """Monomials (w_exp, z_exp, coeff) of the projection kernel

        sum_{q=0}^{p-1} sum_{j=0}^{m} binom(-q/p, j)
            w^{q/p} z^{-q/p-j} (w-z)^j,

    with each (w-z)^j opened by the plain binomial theorem."""
    acc = {}
    for q in range(p):
        for j in range(m + 1):
            cqj = gen_binom(Fraction(-q, p), j)
            if not cqj:
                continue
            for i in range(j + 1):
                c = cqj * math.comb(j, i)
                if i % 2:
                    c = -c
                key = (Fraction(q, p) + (j - i), Fraction(-q, p) - j + i)
                acc[key] = acc.get(key, Fraction(0)) + c
    return [(u, x, c) for (u, x), c in sorted(acc.items()) if c]


def oracle_product(a: GenSeries, b: GenSeries, n: int,
                   locality: int) -> GenSeries:
    """The n-th product by literal residue extraction in w^(1/p), z^(1/p):

        Res_w (a(w)b(z) i_{w,z}(w-z)^n - (-1)^(p_a p_b)
               b(z)a(w) i_{z,w}(w-z)^n) K(w,z),

    with K the projection kernel of slack locality - n - 1, expanded by
    projection_monomials.  Operator coefficients only; the inner sums
    terminate at the annihilation bounds of the two factors."""
    alg = a.alg
    if a.alg is not b.alg:
        raise FdistError("series live over different coefficient algebras")
    if not getattr(alg, "is_fock", False):
        raise FdistError("the product oracle requires operator coefficients")
    if a.shift_base is None or b.shift_base is None:
        raise FdistError("the product oracle requires degree shifts")
    mod = alg.module
    terms = projection_monomials(mod.p, max(locality - n - 1, 0))
    ca, cb = a.shift_base, b.shift_base
    sign = -1 if (a.parity and b.parity) else 1
    residues = {_residue(ra + rb) for ra in a.residues for rb in b.residues}

    def fn(t):
        def act(v):
            out = FockVector(mod, {}, v.poisoned)
            if not v.terms:
                return out
            d = v.max_degree()
            fl = mod.floor
            for (u, x, c) in terms:
                kmax = _floor_int(d + cb - fl - t - x)
                if n >= 0:
                    kmax = min(kmax, n)
                for k in range(kmax + 1):
                    coef = gen_binom(Fraction(n), k) * c
                    if not coef:
                        continue
                    w = a.coeff(n - k + u).apply(b.coeff(t + k + x).apply(v))
                    out = out + w.scale(coef if k % 2 == 0 else -coef)
                kmax = _floor_int(d + ca - fl - u)
                if n >= 0:
                    kmax = min(kmax, n)
                for k in range(kmax + 1):
                    coef = gen_binom(Fraction(n), k) * c
                    if not coef:
                        continue
                    w = b.coeff(t + n - k + x).apply(a.coeff(k + u).apply(v))
                    sgn = -sign * (1 if (n + k) % 2 == 0 else -1)
                    out = out + w.scale(sgn * coef)
            return out

        return FockOp(mod, act, a.parity + b.parity)

    return GenSeries(alg, fn, residues, parity=(a.parity + b.parity) % 2,
                     shift_base=ca + cb - n)


# ---------------------------------------------------------------------
# Twisted group algebra block oracle
# ---------------------------------------------------------------------

MAX_GROUP_SIZE = 4096


def oracle_bicharacter_blocks(orders, comm):
    """Block structure of the twisted group algebra of E = prod Z/d_i.

    orders: the cyclic factor orders d_i; comm[i][j]: the scalar with
    x_i x_j = comm[i][j] x_j x_i (and x_i^{d_i} = 1).  Works on the
    normal-form basis x^g = x_1^{g_1} ... x_r^{g_r}, whose products are
    x^g x^h = tau(g, h) x^{g+h} with tau(g, h) = prod_{i>j}
    comm[i][j]^{g_i h_j}.  The center is found by comparing rows of the
    full multiplication table; the blocks of a twisted group algebra of
    an abelian group all share one dimension (the character group
    permutes them transitively), so the block dimension is pinned down
    by count * dim^2 = |E|, certified to be an exact integer square.

    Returns (block_count, block_dim, dim) with dim = |E|."""
    r = len(orders)
    size = 1
    for d in orders:
        if d < 1:
            raise OracleError("cyclic factor orders must be positive")
        size *= d
    if size > MAX_GROUP_SIZE:
        raise OracleError(f"group size {size} exceeds cap {MAX_GROUP_SIZE}")
    comm = [[as_scalar(x) for x in row] for row in comm]
    for i in range(r):
        if comm[i][i] != ONE:
            raise OracleError("generators must commute with themselves")
        for j in range(r):
            if comm[i][j] * comm[j][i] != ONE:
                raise OracleError("commutation constants must be antisymmetric")
            if comm[i][j] ** orders[i] != ONE or comm[i][j] ** orders[j] != ONE:
                raise OracleError(
                    "commutation constants must respect the factor orders")

    def tau(g, h):
        out = ONE
        for i in range(r):
            if not g[i]:
                continue
            for j in range(i):
                if h[j]:
                    out = out * comm[i][j] ** (g[i] * h[j])
        return out

    elements = list(itertools.product(*[range(d) for d in orders]))

    def add(g, h):
        return tuple((x + y) % d for x, y, d in zip(g, h, orders))

    # full multiplication table: table[g][h] = (g+h, tau(g, h))
    table = {
        g: {h: (add(g, h), tau(g, h)) for h in elements} for g in elements
    }
    gens = [tuple(1 if k == i else 0 for k in range(r)) for i in range(r)]
    central = []
    for g in elements:
        ok = True
        for e in gens:
            left = table[e][g]
            right = table[g][e]
            if left[0] != right[0] or left[1] != right[1]:
                ok = False
                break
        if ok:
            central.append(g)
    count = len(central)
    # the central basis elements must close under multiplication
    cset = set(central)
    for g in central:
        for h in central:
            if table[g][h][0] not in cset:
                raise OracleError("center is not spanned by group elements")
    dim = math.isqrt(size // count)
    if dim * dim * count != size:
        raise OracleError("block count does not divide |E| into squares")
    return count, dim, size


# ---------------------------------------------------------------------
# Dual-coset counting oracle
# ---------------------------------------------------------------------

def oracle_dual_coset_count(gram) -> int:
    """|Lambda' / Lambda| by brute-force coset enumeration.

    The dual lattice is spanned by the columns of the inverse Gram
    matrix; e times any dual vector is integral for e the lcm of the
    inverse's denominators, so coefficient tuples in range(e) reach
    every coset.  Cosets are keyed by the fractional parts of the
    standard coordinates."""
    l = len(gram)
    g = [[Fraction(x) for x in row] for row in gram]
    inv = field_inverse(g, Fraction(1))
    # |det G| * inv is integral, so it bounds the coefficient range
    det = abs(lcm_list([x.denominator for row in inv for x in row]))
    seen = set()
    for coeffs in itertools.product(range(det), repeat=l):
        vec = [
            sum(Fraction(c) * inv[i][j] for j, c in enumerate(coeffs))
            for i in range(l)
        ]
        seen.add(tuple(x - _floor_int(x) for x in vec))
    return len(seen)
