"""Classification machinery for twisted modules: lifts of the lattice
automorphism and their eigendata, the relation-quotient algebra A, its
graded block decomposition, and enumeration of simple-module classes."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cocycle import TwistData, commutator_map
from .lattice import OrbitDecomposition, TwistedLattice
from .linalg import (
    field_inverse,
    field_rank,
    field_solve,
    hnf_columns,
    kernel_basis,
    lcm_list,
    snf,
    solve_int,
)
from .scalar import (
    CycScalar,
    ONE,
    ScalarError,
    as_scalar,
    canonical_root,
    root_of_unity,
)

MAX_COMPONENT_SIZE = 4096


class ClassifyError(Exception):
    pass


class UnsupportedScalar(ClassifyError):
    """Raised when an exact classification step needs a scalar outside
    the roots-of-unity domain (for example a weight exponent that is
    not rational)."""


def root_exponent(mu: CycScalar) -> Fraction:
    """The rational r/k in [0, 1) with mu = zeta_k^r, for mu a root of
    unity."""
    mu = as_scalar(mu)
    k = mu.order()
    if k is None:
        raise UnsupportedScalar(f"{mu} is not a root of unity")
    for r in range(k):
        if root_of_unity(k, r) == mu:
            return Fraction(r, k)
    raise UnsupportedScalar(f"{mu} has no discrete logarithm")  # pragma: no cover


def _unit(l: int, k: int):
    return tuple(1 if i == k else 0 for i in range(l))


def _prime_norm(lat: TwistedLattice, alpha) -> Fraction:
    """(alpha'|alpha') for the component orthogonal to the fixed space."""
    p0 = lat.proj0(alpha)
    n0 = sum(
        p0[i] * sum(Fraction(lat.gram[i][k]) * p0[k] for k in range(lat.rank))
        for i in range(lat.rank)
    )
    return Fraction(lat.pairing(alpha, alpha)) - n0


def _vec_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _vec_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _vec_scale(a, c):
    return tuple(c * x for x in a)


# ---------------------------------------------------------------------
# Finite quotients of lattices
# ---------------------------------------------------------------------

class FiniteQuotient:
    """The finite quotient of two full-rank lattices, given by ambient
    basis columns (rationals allowed) and sublattice columns inside the
    ambient span.  Provides cyclic-factor divisors, generator vectors,
    canonical coordinates and lifts."""

    def __init__(self, ambient_cols, sub_cols, dim: int):
        self.dim = dim
        self.rank = len(ambient_cols)
        self.ambient = [tuple(Fraction(x) for x in col) for col in ambient_cols]
        if self.rank == 0:
            self.divisors = ()
            self.gens = ()
            self.size = 1
            self._u = []
            self._amb_mat = [[] for _ in range(dim)]
            return
        amb_mat = [
            [self.ambient[j][i] for j in range(self.rank)] for i in range(dim)
        ]
        w_cols = []
        for col in sub_cols:
            x = field_solve(amb_mat, [Fraction(v) for v in col], Fraction(1))
            if x is None:
                raise ClassifyError("sublattice outside the ambient span")
            if any(v.denominator != 1 for v in x):
                raise ClassifyError("sublattice not contained in the ambient")
            w_cols.append([int(v) for v in x])
        w = [[c[i] for c in w_cols] for i in range(self.rank)]
        d, u, _v = snf(w)
        divisors = []
        for i in range(self.rank):
            di = d[i][i] if i < len(d) and i < len(d[i]) else 0
            if di == 0:
                raise ClassifyError("quotient is infinite")
            divisors.append(di)
        self.divisors = tuple(divisors)
        uinv = field_inverse([[Fraction(x) for x in row] for row in u],
                             Fraction(1))
        self.gens = tuple(
            tuple(
                sum(uinv[j][i] * self.ambient[j][k] for j in range(self.rank))
                for k in range(dim)
            )
            for i in range(self.rank)
        )
        self._u = u
        self._amb_mat = amb_mat
        self.size = math.prod(divisors)

    def coords(self, vec):
        """Canonical coordinates of vec + sub in the cyclic factors."""
        if self.rank == 0:
            return ()
        x = field_solve(self._amb_mat, [Fraction(v) for v in vec], Fraction(1))
        if x is None or any(v.denominator != 1 for v in x):
            raise ClassifyError("vector outside the ambient lattice")
        x = [int(v) for v in x]
        return tuple(
            sum(self._u[i][j] * x[j] for j in range(self.rank))
            % self.divisors[i]
            for i in range(self.rank)
        )

    def lift(self, coords):
        out = tuple(
            sum(Fraction(c) * self.gens[i][k] for i, c in enumerate(coords))
            for k in range(self.dim)
        )
        if all(v.denominator == 1 for v in out):
            return tuple(int(v) for v in out)
        return out

    def elements(self):
        return itertools.product(*(range(d) for d in self.divisors))


# ---------------------------------------------------------------------
# Lift of the automorphism and its eigendata
# ---------------------------------------------------------------------

@dataclass
class OrbitExtension:
    rep: tuple
    length: int
    roots: tuple
    k_table: dict
    eigenvectors: dict
    eigen_check: str


@dataclass
class ExtensionData:
    decomposition: OrbitDecomposition
    orbits: list
    order_check: str


def extend_automorphism(T: TwistData,
                        decomposition: OrbitDecomposition | None = None
                        ) -> ExtensionData:
    """Per generating orbit: all roots mu, the coefficients k_s, and the
    eigenvector recipes Y_j = sum_s w^(-js) k_s X_(sigma^s a); verifies
    the eigen relations symbolically and, for the canonical cocycle
    values, that the lift has the same order as the automorphism."""
    lat = T.lattice
    if decomposition is None:
        decomposition = lat.reduce_generating_set()
    default_phi = all(
        T.phi_seed[i] == T.phi_zero(_unit(lat.rank, i))
        for i in range(lat.rank)
    )
    order_status = "pass" if default_phi else "skipped"
    orbits = []
    for orb in decomposition.orbits:
        pa = len(orb)
        roots = T.mu_roots(orb)
        k_table = {}
        eigenvectors = {}
        check = "pass"
        prod = T.orbit_phi_product(orb)
        if default_phi and prod ** (lat.p // pa) != ONE:
            order_status = "fail"
        for mi, mu in enumerate(roots):
            ks = T.k_coeffs(orb, mu)
            k_table[mi] = ks
            if mu ** pa != prod:
                check = "fail"
            for j in range(pa):
                coeffs = tuple(
                    root_of_unity(pa, (-j * s) % pa) * ks[s] for s in range(pa)
                )
                eigenvectors[(mi, j)] = coeffs
                # sigma-hat maps the s-th coefficient slot to s+1 with a
                # factor phi(sigma^s a); the recipe must be an eigenvector
                # of eigenvalue mu * w^j
                eig = mu * root_of_unity(pa, j % pa)
                for s in range(pa):
                    lhs = coeffs[s] * T.phi(orb[s])
                    rhs = eig * coeffs[(s + 1) % pa]
                    if lhs != rhs:
                        check = "fail"
        orbits.append(OrbitExtension(orb[0], pa, roots, k_table,
                                     eigenvectors, check))
    return ExtensionData(decomposition, orbits, order_status)


# ---------------------------------------------------------------------
# The relation-quotient algebra A
# ---------------------------------------------------------------------

@dataclass
class PowerRelation:
    index: int
    power: int
    theta: CycScalar
    normalizer: CycScalar


class PresentedAlgebraA:
    """The quotient of the extended-lattice group algebra by the twist
    relations e(sigma^s a) = k_s^(-1) e(a) on a generating set of
    orbits.

    Concretely the algebra has basis indexed by Lambda/K, where K is
    spanned by the difference vectors sigma^s a - a of the generating
    orbits; each e(d), d in K, is identified with an explicit scalar.
    The zero marker is set when the relations force 1 = theta for some
    scalar theta != 1 (the obstructed case)."""

    def __init__(self, twist: TwistData, decomposition: OrbitDecomposition,
                 mu_choice):
        self.twist = twist
        self.lattice = twist.lattice
        self.dec = decomposition
        self.mu_choice = tuple(mu_choice)
        self.zero = False
        self.witness = None
        lat = self.lattice
        l = lat.rank
        if len(self.mu_choice) != len(decomposition.orbits):
            raise ClassifyError("one root choice per generating orbit required")
        obstructed, wit = twist.obstruction_check(decomposition)
        if obstructed:
            self.zero = True
            self.witness = ("commutator obstruction", wit)
            return
        self.reps = decomposition.reps
        self.lengths = decomposition.lengths
        self.m = decomposition.m
        self.ks = []
        for orb, mu in zip(decomposition.orbits, self.mu_choice):
            if mu ** len(orb) != twist.orbit_phi_product(orb):
                raise ClassifyError("mu choice is not an orbit root")
            self.ks.append(twist.k_coeffs(orb, mu))
        # difference vectors and their scalar images
        self._dvecs = []
        self._dscalars = []
        for j, orb in enumerate(decomposition.orbits):
            for s in range(1, len(orb)):
                d = _vec_sub(orb[s], orb[0])
                self._dvecs.append(d)
                self._dscalars.append(
                    twist.epsilon(d, orb[0]) * self.ks[j][s].inverse())
        self._dmat = [[d[i] for d in self._dvecs] for i in range(l)]
        cols, _u = hnf_columns(self._dmat) if self._dvecs else ([], None)
        self._khnf = []
        if self._dvecs:
            for jc in range(len(self._dvecs)):
                col = [cols[i][jc] for i in range(l)]
                if any(col):
                    self._khnf.append(tuple(col))
        self._k_cache = {}
        self._e_cache = {}
        # scalar relations must commute with the whole group algebra
        for d in self._dvecs:
            for k in range(l):
                if commutator_map(lat, d, _unit(l, k)) != ONE:
                    self.zero = True
                    self.witness = ("non-central relation", (d, k))
                    return
        # the scalar image of a K-vector must not depend on the combo
        if self._dvecs:
            for ker in kernel_basis(self._dmat):
                val = self._image_from_combo(ker)
                if val != ONE:
                    self.zero = True
                    self.witness = ("inconsistent relation scalars", ker)
                    return
        # commutation constants and their invariants
        n = len(self.reps)
        self.c = [[twist.commutator(self.reps[i], self.reps[j])
                   for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(n):
                if self.c[i][j] * self.c[j][i] != ONE:
                    raise ClassifyError("commutation constants not antisymmetric")
                if (i >= self.m or j >= self.m) and \
                        self.c[i][j] ** lat.p != ONE:
                    raise ClassifyError(
                        "degree-zero commutation constant is not a p-th root")
        self.grading = tuple(lat.nu(rep) for rep in self.reps)
        # power relations on the degree-zero generators
        self.power_relations = []
        for j in range(self.m, n):
            pj = self.lengths[j]
            rep = self.reps[j]
            efold = ONE
            for i in range(1, pj):
                efold = efold * twist.epsilon(_vec_scale(rep, i), rep)
            theta = efold * self.k_image(_vec_scale(rep, pj))
            try:
                normalizer = canonical_root(theta, pj).inverse()
            except ScalarError as exc:
                raise UnsupportedScalar(
                    f"power relation scalar {theta} has no canonical "
                    f"{pj}-th root") from exc
            self.power_relations.append(PowerRelation(j, pj, theta, normalizer))
        # the degree-zero component: E = Lambda_0 / K
        total = [[sum(lat._sigma_pows[s][i][j] for s in range(lat.p))
                  for j in range(l)] for i in range(l)]
        lam0 = kernel_basis(total)
        self.E = FiniteQuotient(
            [tuple(v) for v in lam0], [tuple(d) for d in self._khnf], l)
        if self.E.size > MAX_COMPONENT_SIZE:
            raise ClassifyError("degree-zero component exceeds the size cap")
        self.dim_B0 = self.E.size

    # -- scalar bookkeeping -------------------------------------------

    def _image_from_combo(self, combo) -> CycScalar:
        """A-image scalar of e(sum_i combo_i d_i), folded stepwise."""
        twist = self.twist
        cur = (0,) * self.lattice.rank
        cfold = ONE
        sprod = ONE
        for idx, mult in enumerate(combo):
            if not mult:
                continue
            d = self._dvecs[idx]
            if mult > 0:
                v, s = d, self._dscalars[idx]
            else:
                v = _vec_scale(d, -1)
                s = twist.epsilon(d, v) / self._dscalars[idx]
            for _ in range(abs(mult)):
                cfold = cfold * twist.epsilon(cur, v)
                cur = _vec_add(cur, v)
                sprod = sprod * s
        return sprod / cfold

    def k_image(self, kvec) -> CycScalar:
        """The scalar that e(kvec) equals in A, for kvec in K."""
        kvec = tuple(kvec)
        if kvec not in self._k_cache:
            if not any(kvec):
                self._k_cache[kvec] = ONE
            else:
                combo = solve_int(self._dmat, list(kvec))
                if combo is None:
                    raise ClassifyError(f"{kvec} is not in the relation lattice")
                self._k_cache[kvec] = self._image_from_combo(combo)
        return self._k_cache[kvec]

    def rep_of(self, gamma):
        """Canonical representative of gamma + K."""
        g = list(gamma)
        for col in self._khnf:
            pr = next(i for i, x in enumerate(col) if x)
            q = g[pr] // col[pr]
            if q:
                for i in range(len(g)):
                    g[i] -= q * col[i]
        return tuple(g)

    def e_image(self, gamma):
        """(scalar, rep) with e(gamma) = scalar * e(rep) in A."""
        gamma = tuple(gamma)
        if gamma not in self._e_cache:
            rep = self.rep_of(gamma)
            d = _vec_sub(gamma, rep)
            s = self.twist.epsilon(d, rep).inverse() * self.k_image(d)
            self._e_cache[gamma] = (s, rep)
        return self._e_cache[gamma]

    def derived_mu(self, gamma) -> CycScalar:
        """The root mu(gamma) forced by the relations, for any gamma."""
        lat = self.lattice
        d = _vec_sub(lat.apply_sigma(gamma), gamma)
        if any(d):
            mu = self.twist.epsilon(d, gamma).inverse() * self.k_image(d) \
                * self.twist.phi(gamma)
        else:
            mu = self.twist.phi(gamma)
        orb = lat.orbit(gamma)
        if mu ** len(orb) != self.twist.orbit_phi_product(orb):
            raise ClassifyError(f"derived root at {gamma} is not an orbit root")
        return mu

    # -- degree-zero component arithmetic -----------------------------

    def y_scalar(self, g) -> CycScalar:
        """Scalar s with y_g = s^(-1) * [rep], the normalized basis of
        the degree-zero component (y_g = image of e(lift(g)))."""
        s, _rep = self.e_image(self.E.lift(g))
        return s

    def tau(self, g, h) -> CycScalar:
        """Multiplication scalar: y_g y_h = tau(g, h) y_(g+h)."""
        tg, th = self.E.lift(g), self.E.lift(h)
        gh = tuple((a + b) % d for a, b, d in zip(g, h, self.E.divisors))
        tgh = self.E.lift(gh)
        delta = _vec_sub(_vec_add(tg, th), tgh)
        return self.twist.epsilon(tg, th) * \
            self.twist.epsilon(delta, tgh).inverse() * self.k_image(delta)

    def bichar(self, g, h) -> CycScalar:
        """Commutator bicharacter on E: b(g, h) with
        y_g y_h = b(g, h) y_h y_g."""
        return commutator_map(self.lattice, self.E.lift(g), self.E.lift(h))


def build_algebra_A(T: TwistData, mu_choice=None,
                    decomposition: OrbitDecomposition | None = None
                    ) -> PresentedAlgebraA:
    if decomposition is None:
        decomposition = T.lattice.reduce_generating_set()
    if mu_choice is None:
        mu_choice = tuple(
            T.mu_roots(orb)[0] for orb in decomposition.orbits)
    return PresentedAlgebraA(T, decomposition, mu_choice)


# ---------------------------------------------------------------------
# Block decomposition of the degree-zero component
# ---------------------------------------------------------------------

def _e_add(g, h, divisors):
    return tuple((a + b) % d for a, b, d in zip(g, h, divisors))


def _e_sub(g, h, divisors):
    return tuple((a - b) % d for a, b, d in zip(g, h, divisors))


def _b0_mul(A: PresentedAlgebraA, x: dict, y: dict) -> dict:
    out = {}
    for g, cx in x.items():
        for h, cy in y.items():
            c = cx * cy * A.tau(g, h)
            if not c:
                continue
            key = _e_add(g, h, A.E.divisors)
            s = out.get(key)
            s = c if s is None else s + c
            if s:
                out[key] = s
            elif key in out:
                del out[key]
    return out


class _GroupScalars:
    """Multiplicative lift of a subgroup S of E on which the y-basis
    commutes: normalized generators (n_k y_(r_k))^(o_k) = 1 give a
    homomorphism psi with psi(a) = scalar(a) * y_(elem(a))."""

    def __init__(self, A: PresentedAlgebraA, quotient: FiniteQuotient):
        self.A = A
        self.q = quotient
        self.gens = []
        for i in range(quotient.rank):
            rk = tuple(
                int(x) % d for x, d in zip(
                    quotient.gens[i], A.E.divisors))
            ok = quotient.divisors[i]
            c = ONE
            g = tuple(0 for _ in A.E.divisors)
            for _ in range(ok):
                c = c * A.tau(g, rk)
                g = _e_add(g, rk, A.E.divisors)
            if any(g):
                raise ClassifyError("subgroup generator order mismatch")
            try:
                nk = canonical_root(c, ok).inverse()
            except ScalarError as exc:
                raise UnsupportedScalar(
                    f"group scalar {c} has no canonical {ok}-th root") from exc
            self.gens.append((rk, ok, nk))

    def psi(self, coords):
        """(element of E, scalar) of the normalized product for the
        given subgroup coordinates."""
        A = self.A
        g = tuple(0 for _ in A.E.divisors)
        s = ONE
        for (rk, ok, nk), a in zip(self.gens, coords):
            for _ in range(a % ok):
                s = s * nk * A.tau(g, rk)
                g = _e_add(g, rk, A.E.divisors)
        return g, s

    def character(self, label, coords) -> CycScalar:
        out = ONE
        for (rk, ok, nk), t, a in zip(self.gens, label, coords):
            out = out * root_of_unity(ok, (t * a) % ok)
        return out

    def labels(self):
        return itertools.product(*(range(ok) for _rk, ok, _nk in self.gens))


@dataclass
class Block:
    label: tuple
    idempotent: dict
    dim: int
    rank: int


@dataclass
class ADecomposition:
    algebra: PresentedAlgebraA
    radical: FiniteQuotient
    blocks: list
    count: int
    dims: tuple
    certified: dict


def _radical_quotient(A: PresentedAlgebraA) -> FiniteQuotient:
    """Radical of the commutator bicharacter on E, via Smith normal
    form of the exponent matrix."""
    r = A.E.rank
    if r == 0:
        return FiniteQuotient([], [], 0)
    gens = [_unit(r, i) for i in range(r)]
    exps = [[root_exponent(A.bichar(gens[i], gens[j])) for j in range(r)]
            for i in range(r)]
    P = lcm_list([e.denominator for row in exps for e in row])
    b = [[int(e * P) for e in row] for row in exps]
    stacked = [b[i] + [P if k == i else 0 for k in range(r)] for i in range(r)]
    basis = kernel_basis(stacked)
    cols = [tuple(v[:r]) for v in basis]
    sub = [tuple(A.E.divisors[i] if k == i else 0 for k in range(r))
           for i in range(r)]
    return FiniteQuotient(cols, sub, r)


def decompose_A(A: PresentedAlgebraA) -> ADecomposition:
    """Simple blocks of the degree-zero component B_0, as explicit
    central idempotents indexed by characters of the bicharacter
    radical, with exact certification that they are orthogonal
    idempotents summing to one and that the block dimensions square-sum
    to dim B_0.  Homogeneous invertible elements carry the block
    decomposition from B_0 to graded ideals of the whole algebra."""
    if A.zero:
        raise ClassifyError("the zero algebra has no block decomposition")
    E = A.E
    rad = _radical_quotient(A)
    lifts = _GroupScalars(A, rad)
    inv_size = CycScalar.rational(Fraction(1, rad.size))
    blocks = []
    zero_g = tuple(0 for _ in E.divisors)
    one = {zero_g: ONE}
    total = {}
    certified = {
        "idempotent": True,
        "orthogonal": True,
        "sum_to_one": True,
        "dims_square": True,
    }
    elements = list(E.elements())
    index = {g: i for i, g in enumerate(elements)}
    dims = []
    for label in lifts.labels():
        coeffs = {}
        for a in rad.elements():
            g, s = lifts.psi(a)
            c = lifts.character(label, a).inverse() * s * inv_size
            coeffs[g] = coeffs.get(g, as_scalar(0)) + c
        coeffs = {g: c for g, c in coeffs.items() if c}
        if _b0_mul(A, coeffs, coeffs) != coeffs:
            certified["idempotent"] = False
        for g, c in coeffs.items():
            s = total.get(g)
            s = c if s is None else s + c
            if s:
                total[g] = s
            elif g in total:
                del total[g]
        rows = []
        for h in elements:
            prod = _b0_mul(A, coeffs, {h: ONE})
            rows.append([prod.get(g, as_scalar(0)) for g in elements])
        rank = field_rank(rows, ONE)
        d = math.isqrt(rank)
        if d * d != rank:
            certified["dims_square"] = False
        dims.append(d)
        blocks.append(Block(label, coeffs, d, rank))
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            if _b0_mul(A, blocks[i].idempotent, blocks[j].idempotent):
                certified["orthogonal"] = False
    if total != one:
        certified["sum_to_one"] = False
    if sum(b.rank for b in blocks) != E.size:
        certified["dims_square"] = False
    return ADecomposition(A, rad, blocks, len(blocks), tuple(dims), certified)


# ---------------------------------------------------------------------
# Weight admissibility and eta cosets
# ---------------------------------------------------------------------

def _pairing_matrix(lat: TwistedLattice):
    """M[k][i] = (F_i | e_k) over the fixed-sublattice basis F."""
    F = lat.fixed_basis
    return [
        [sum(F[i][j] * lat.gram[j][k] for j in range(lat.rank))
         for i in range(len(F))]
        for k in range(lat.rank)
    ]


def admissible_base_weight(A: PresentedAlgebraA):
    """A weight xi with xi(alpha(0)) = (alpha'|alpha')/2 - lambda(alpha)
    mod Z over an integer basis, or a witness that none exists.

    Returns (True, xi values at the standard basis) or (False, witness)."""
    T = A.twist
    lat = A.lattice
    l = lat.rank
    c = []
    for k in range(l):
        e = _unit(l, k)
        lam = root_exponent(A.derived_mu(e))
        c.append(_prime_norm(lat, e) / 2 - lam)
    F = lat.fixed_basis
    f = len(F)
    if f == 0:
        for k in range(l):
            if c[k].denominator != 1:
                return False, ("no weight satisfies the congruence", k, c[k])
        return True, tuple(Fraction(0) for _ in range(l))
    M = _pairing_matrix(lat)
    d, u, v = snf(M)
    uc = [sum(Fraction(u[i][j]) * c[j] for j in range(l)) for i in range(l)]
    z = [Fraction(0)] * f
    for i in range(l):
        di = d[i][i] if i < min(l, f) else 0
        if di:
            z[i] = uc[i] / di
        elif uc[i].denominator != 1:
            return False, ("no weight satisfies the congruence", i, uc[i])
    y = [sum(Fraction(v[i][j]) * z[j] for j in range(f)) for i in range(f)]
    xi0 = tuple(
        sum(M[k][i] * y[i] for i in range(f)) for k in range(l))
    return True, xi0


def eta_cosets(lat: TwistedLattice):
    """Representatives of the quotient of the fixed sublattice's dual
    by the degree lattice nu(Lambda), as weight-value tuples at the
    standard basis.  Representatives use the canonical cyclic-factor
    coordinates of the Smith decomposition."""
    F = lat.fixed_basis
    f = len(F)
    l = lat.rank
    if f == 0:
        return [tuple(Fraction(0) for _ in range(l))], FiniteQuotient([], [], 0)
    gf = [[lat.pairing(F[i], F[j]) for j in range(f)] for i in range(f)]
    gf_inv = field_inverse([[Fraction(x) for x in row] for row in gf],
                           Fraction(1))
    ambient = [tuple(gf_inv[i][j] for i in range(f)) for j in range(f)]
    fmat = [[Fraction(F[i][j]) for i in range(f)] for j in range(l)]
    sub = []
    for k in range(l):
        x = field_solve(fmat, [Fraction(v) for v in lat.proj0(_unit(l, k))],
                        Fraction(1))
        if x is None:
            raise ClassifyError("projection outside the fixed span")
        sub.append(tuple(x))
    Q = FiniteQuotient(ambient, sub, f)
    M = _pairing_matrix(lat)
    reps = []
    for cds in Q.elements():
        y = Q.lift(cds)
        reps.append(tuple(
            sum(Fraction(M[k][i]) * Fraction(y[i]) for i in range(f))
            for k in range(l)))
    return reps, Q


# ---------------------------------------------------------------------
# Simple twisted-module classes
# ---------------------------------------------------------------------

@dataclass
class SimpleModuleClass:
    mu_choice: tuple
    ideal_index: int
    eta: tuple
    dimension: int
    base_weight: tuple
    eta_index: int = 0


@dataclass
class MuEntry:
    mu_choice: tuple
    admissible: bool
    detail: object
    dim_B0: int = 0
    block_count: int = 0
    block_dims: tuple = ()
    classes: list = field(default_factory=list)


@dataclass
class EnumerationResult:
    obstructed: bool
    witness: object
    eta_reps: list
    eta_count: int
    entries: list
    classes: list
    order: int
    orbit_lengths: tuple


def enumerate_simple_twisted(T: TwistData,
                             decomposition: OrbitDecomposition | None = None
                             ) -> EnumerationResult:
    """All simple twisted-module classes: root choices per generating
    orbit, filtered by weight admissibility, crossed with the simple
    blocks of A and with the eta cosets.  The obstructed case returns
    no classes together with the commutator witness.

    Classes are deduplicated only by their explicit (roots, block, eta)
    data; coincidences across different root choices are reported as
    separate entries."""
    lat = T.lattice
    if decomposition is None:
        decomposition = lat.reduce_generating_set()
    obstructed, wit = T.obstruction_check(decomposition)
    lengths = decomposition.lengths
    if obstructed:
        return EnumerationResult(True, wit, [], 0, [], [], lat.p, lengths)
    reps, _Q = eta_cosets(lat)
    entries = []
    classes = []
    for mu_choice in itertools.product(
            *(T.mu_roots(orb) for orb in decomposition.orbits)):
        A = PresentedAlgebraA(T, decomposition, mu_choice)
        if A.zero:
            entries.append(MuEntry(mu_choice, False, A.witness))
            continue
        ok, detail = admissible_base_weight(A)
        if not ok:
            entries.append(MuEntry(mu_choice, False, detail))
            continue
        xi0 = detail
        dec_A = decompose_A(A)
        entry = MuEntry(mu_choice, True, xi0, A.dim_B0, dec_A.count,
                        dec_A.dims)
        for ideal_index in range(dec_A.count):
            for ei, eta in enumerate(reps):
                cls = SimpleModuleClass(
                    mu_choice, ideal_index, eta,
                    dec_A.blocks[ideal_index].dim, xi0, ei)
                entry.classes.append(cls)
                classes.append(cls)
        entries.append(entry)
    return EnumerationResult(False, None, reps, len(reps), entries, classes,
                             lat.p, lengths)


# ---------------------------------------------------------------------
# Concrete vacuum spaces and module instantiation
# ---------------------------------------------------------------------

def _maximal_isotropic(A: PresentedAlgebraA, rad: FiniteQuotient):
    """A maximal subgroup of E containing the radical on which the
    bicharacter is trivial, as a set of E-coordinates."""
    E = A.E
    members = set()
    for a in rad.elements():
        vec = rad.lift(a)
        members.add(tuple(int(x) % d for x, d in zip(vec, E.divisors)))
    changed = True
    elements = list(E.elements())
    while changed:
        changed = False
        for g in elements:
            if g in members:
                continue
            if all(A.bichar(g, h) == ONE for h in members):
                # close under the subgroup operation
                new = set(members)
                frontier = {g}
                while frontier:
                    x = frontier.pop()
                    if x in new:
                        continue
                    new.add(x)
                    for h in list(new):
                        frontier.add(_e_add(x, h, E.divisors))
                members = new
                changed = True
                break
    return members


def _subgroup_quotient(A: PresentedAlgebraA, members) -> FiniteQuotient:
    """Structure of a subgroup of E given by its coordinate set."""
    E = A.E
    r = E.rank
    if r == 0:
        return FiniteQuotient([], [], 0)
    cols = [tuple(g) for g in sorted(members)]
    cols += [tuple(E.divisors[i] if k == i else 0 for k in range(r))
             for i in range(r)]
    mat = [[c[i] for c in cols] for i in range(r)]
    h, _u = hnf_columns(mat)
    basis = []
    for j in range(len(cols)):
        col = tuple(h[i][j] for i in range(r))
        if any(col):
            basis.append(col)
    sub = [tuple(E.divisors[i] if k == i else 0 for k in range(r))
           for i in range(r)]
    return FiniteQuotient(basis, sub, r)


class ClassOmega:
    """Vacuum space of an enumerated class: a window of degree lifts
    tensored with a simple module of the degree-zero component, with
    the e-action computed through the relation-quotient algebra.  The
    action poisons (returns None) when it leaves the degree window."""

    def __init__(self, A: PresentedAlgebraA, dec_A: ADecomposition,
                 ideal_index: int, xi0, eta, window: int = 2):
        self.A = A
        lat = A.lattice
        E = A.E
        self.block = dec_A.blocks[ideal_index]
        rad = dec_A.radical
        members = _maximal_isotropic(A, rad)
        self.H = _subgroup_quotient(A, members)
        self.h_lifts = _GroupScalars(A, self.H)
        if E.size % len(members):
            raise ClassifyError("isotropic subgroup size does not divide |E|")
        self.d = E.size // len(members)
        if self.d != self.block.dim:
            raise ClassifyError("isotropic index does not match the block dim")
        # transversal of the subgroup in E, canonical minimal representatives
        cosets = {}
        for g in E.elements():
            key = min(_e_add(g, h, E.divisors) for h in members)
            cosets.setdefault(key, key)
        self.transversal = sorted(cosets)
        self.coset_rep = {}
        for g in E.elements():
            self.coset_rep[g] = min(
                _e_add(g, h, E.divisors) for h in members)
        self.members = members
        # pick a character of H whose induced module lies in the block
        self.h_label = None
        for label in self.h_lifts.labels():
            f = self._projector(label)
            if _b0_mul(A, self.block.idempotent, f) == f:
                self.h_label = label
                self.f = f
                break
        if self.h_label is None:
            raise ClassifyError("no subgroup character matches the block")
        # degree window
        self.window = window
        self.mm = A.m
        grid = itertools.product(
            *(range(-window, window + 1) for _ in range(self.mm)))
        self.lines = [(tuple(k), t) for k in grid for t in self.transversal]
        self.lookup = {line: i for i, line in enumerate(self.lines)}
        self.size = len(self.lines)
        lat_rank = lat.rank
        self._xis = []
        for (k, t) in self.lines:
            lk = self._lift_vec(k)
            nu = lat.nu(lk)
            self._xis.append(tuple(
                as_scalar(xi0[i] + eta[i] + nu[i]) for i in range(lat_rank)))
        # degree-coordinate solve data: nu over the nonzero-degree reps
        self._xi_basis = [lat.nu(A.reps[i]) for i in range(self.mm)]

    def _projector(self, label):
        coeffs = {}
        inv = CycScalar.rational(Fraction(1, self.H.size))
        for a in self.H.elements():
            g, s = self.h_lifts.psi(a)
            c = self.h_lifts.character(label, a).inverse() * s * inv
            coeffs[g] = coeffs.get(g, as_scalar(0)) + c
        return {g: c for g, c in coeffs.items() if c}

    def _lift_vec(self, k):
        lat = self.A.lattice
        out = (0,) * lat.rank
        for i, c in enumerate(k):
            out = _vec_add(out, _vec_scale(self.A.reps[i], c))
        return out

    def _grading_coords(self, alpha):
        lat = self.A.lattice
        nu = lat.nu(alpha)
        if self.mm == 0:
            if any(nu):
                raise ClassifyError("nonzero degree in a trivially graded case")
            return ()
        mat = [[Fraction(self._xi_basis[i][k]) for i in range(self.mm)]
               for k in range(lat.rank)]
        x = field_solve(mat, [Fraction(v) for v in nu], Fraction(1))
        if x is None or any(v.denominator != 1 for v in x):
            raise ClassifyError("degree outside the grading lattice")
        return tuple(int(v) for v in x)

    def xi(self, i):
        return self._xis[i]

    def _y_act(self, g, t):
        """y_g applied to the module line v_t: (t', scalar)."""
        A = self.A
        E = A.E
        gt = _e_add(g, t, E.divisors)
        t2 = self.coset_rep[gt]
        h = _e_sub(gt, t2, E.divisors)
        hc = self.H.coords(h)
        gh, sh = self.h_lifts.psi(hc)
        if gh != h:
            raise ClassifyError("subgroup lift mismatch")
        lam = self.h_lifts.character(self.h_label, hc) / sh
        scalar = A.tau(g, t) * A.tau(t2, h).inverse() * lam
        return t2, scalar

    def e_act(self, alpha, i):
        A = self.A
        twist = A.twist
        k, t = self.lines[i]
        a = self._grading_coords(alpha)
        k2 = tuple(x + y for x, y in zip(k, a))
        if any(abs(x) > self.window for x in k2):
            return None
        lk = self._lift_vec(k)
        lk2 = self._lift_vec(k2)
        delta = _vec_sub(_vec_add(tuple(alpha), lk), lk2)
        g = A.E.coords(delta)
        s1, _rep = A.e_image(delta)
        sg = A.y_scalar(g)
        t2, smod = self._y_act(g, t)
        total = twist.epsilon(alpha, lk) * \
            twist.epsilon(lk2, delta).inverse() * s1 / sg * smod
        return [(self.lookup[(k2, t2)], total)]


def instantiate_class(T: TwistData, cls: SimpleModuleClass, trunc,
                      decomposition: OrbitDecomposition | None = None,
                      window: int = 2):
    """A truncated Fock module realizing an enumerated class."""
    from .fock import FockModule

    if decomposition is None:
        decomposition = T.lattice.reduce_generating_set()
    A = PresentedAlgebraA(T, decomposition, cls.mu_choice)
    if A.zero:
        raise ClassifyError(f"algebra collapsed: {A.witness}")
    dec_A = decompose_A(A)
    omega = ClassOmega(A, dec_A, cls.ideal_index, cls.base_weight, cls.eta,
                       window)
    return FockModule(T, omega, trunc)


# ---------------------------------------------------------------------
# The twisted-module conditions
# ---------------------------------------------------------------------

_RANK = {"pass": 0, "untestable": 1, "fail": 2}


def _check_relation_i(T, module, gamma, mu, probes):
    lat = T.lattice
    orb = lat.orbit(gamma)
    ks = T.k_coeffs(orb, mu)
    status, wit = "pass", None
    for s in range(1, len(orb)):
        diff = module.e_op(orb[s]) - module.e_op(gamma).scale(ks[s].inverse())
        saw = False
        for v in probes:
            r = diff.apply(v)
            if r.poisoned:
                continue
            saw = True
            if not r.is_zero():
                return "fail", (gamma, s)
        if not saw:
            status = "untestable"
            wit = wit or (gamma, s)
    return status, wit


def _check_weight_ii(T, module, gamma, mu):
    lat = T.lattice
    try:
        lam = root_exponent(mu)
    except UnsupportedScalar:
        return "fail", (gamma, "irrational exponent")
    target = _prime_norm(lat, gamma) / 2 - lam
    for i in range(module.omega.size):
        xi = module.omega.xi(i)
        val = sum(
            (as_scalar(a) * xi[k] for k, a in enumerate(gamma)), as_scalar(0))
        try:
            q = val.rational_value()
        except ScalarError:
            return "fail", (gamma, i, "irrational weight")
        if (q - target).denominator != 1:
            return "fail", (gamma, i, q - target)
    return "pass", None


def twisted_conditions(T: TwistData, module, mu_map=None, probes=None):
    """Checks, for alpha over an integer basis grouped by orbit, that
    some orbit root mu makes (i) e(sigma^s a) = k_s^(-1) e(a) hold on
    the module and (ii) every weight satisfies
    xi(alpha(0)) = (alpha'|alpha')/2 - lambda mod Z with
    lambda the exact exponent of mu.

    Both the orbit length and the global automorphism order are
    reported, since either could serve as the root degree; the root
    candidates come from the orbit length.

    Returns a list of per-orbit report dicts with keys orbit, length,
    order, mu, cond_i, cond_ii, witness."""
    from .fock import worst_status

    lat = T.lattice
    l = lat.rank
    if probes is None:
        probes = [module.vacuum(i) for i in range(module.omega.size)]
    groups = {}
    for k in range(l):
        e = _unit(l, k)
        key = min(lat.orbit(e))
        groups.setdefault(key, []).append(e)
    reports = []
    for key in sorted(groups):
        vectors = groups[key]
        orb0 = lat.orbit(vectors[0])
        candidates = [mu_map[key]] if mu_map and key in mu_map \
            else list(T.mu_roots(orb0))
        best = None
        for mu in candidates:
            ci, cii, wit = "pass", "pass", None
            for gamma in vectors:
                s1, w1 = _check_relation_i(T, module, gamma, mu, probes)
                if _RANK[s1] > _RANK[ci]:
                    ci = s1
                if s1 == "fail":
                    wit = wit or ("(i)",) + w1
                s2, w2 = _check_weight_ii(T, module, gamma, mu)
                if _RANK[s2] > _RANK[cii]:
                    cii = s2
                if s2 == "fail":
                    wit = wit or ("(ii)",) + w2
            entry = {
                "orbit": key,
                "length": len(orb0),
                "order": lat.p,
                "mu": mu,
                "cond_i": ci,
                "cond_ii": cii,
                "witness": wit,
            }
            status = worst_status([ci, cii])
            if best is None or _RANK[status] < _RANK[_entry_status(best)]:
                best = entry
            if status == "pass":
                break
        reports.append(best)
    return reports


def _entry_status(entry):
    from .fock import worst_status

    return worst_status([entry["cond_i"], entry["cond_ii"]])


def conditions_status(reports) -> str:
    from .fock import worst_status

    return worst_status([_entry_status(r) for r in reports])
