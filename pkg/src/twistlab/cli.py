"""Batch command-line interface: ingest a lattice/automorphism job
spec, run the invariant suite, and emit classification reports.

Output is deterministic structured text: identical specs produce
byte-identical reports.  Exit codes: 0 success, 1 invariant failure,
2 input error, 3 unsupported-scalar refusal.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from .classify import (
    UnsupportedScalar,
    conditions_status,
    enumerate_simple_twisted,
)
from .cocycle import CocycleError, TwistData, build_epsilon, locality_order
from .fdist import kernel_delta_check
from .fock import (
    FockError,
    FockModule,
    RegularOmega,
    e_group_checks,
    heisenberg_commutation_check,
    product_check,
    virasoro_element_checks,
    worst_status,
)
from .lattice import LatticeError, TwistedLattice
from .scalar import ConductorOverflow, ScalarError, parse_scalar

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_INPUT = 2
EXIT_SCALAR = 3


class InputError(Exception):
    pass


@dataclass
class JobSpec:
    """A parsed job: lattice data, twist options, truncation and
    optional vectors for the pairing command."""

    gram: list
    sigma: list
    eps: dict = field(default_factory=dict)
    phi: dict = field(default_factory=dict)
    mu: list | None = None
    trunc: int = 4
    bound: int = 1
    alpha: list | None = None
    beta: list | None = None

    def to_dict(self) -> dict:
        out = {"gram": self.gram, "sigma": self.sigma,
               "trunc": self.trunc, "bound": self.bound}
        if self.eps:
            out["eps"] = {f"{i},{j}": v for (i, j), v in
                          sorted(self.eps.items())}
        if self.phi:
            out["phi"] = {str(i): v for i, v in sorted(self.phi.items())}
        if self.mu is not None:
            out["mu"] = self.mu
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.beta is not None:
            out["beta"] = self.beta
        return out

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _int_matrix(data, name):
    if not isinstance(data, list) or not data or \
            any(not isinstance(r, list) for r in data):
        raise InputError(f"{name} must be a non-empty list of rows")
    for row in data:
        if len(row) != len(data) or any(not isinstance(x, int) for x in row):
            raise InputError(f"{name} must be a square integer matrix")
    return [list(r) for r in data]


def _int_vector(data, l, name):
    if not isinstance(data, list) or len(data) != l or \
            any(not isinstance(x, int) for x in data):
        raise InputError(f"{name} must be an integer vector of length {l}")
    return list(data)


def parse_job(text: str) -> JobSpec:
    """Parse a JSON job spec; raises InputError with line/column on
    malformed input."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(
            f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise InputError("job spec must be a JSON object")
    known = {"gram", "sigma", "eps", "phi", "mu", "trunc", "bound",
             "alpha", "beta"}
    for key in data:
        if key not in known:
            raise InputError(f"unknown field {key!r}")
    if "gram" not in data or "sigma" not in data:
        raise InputError("job spec requires gram and sigma")
    gram = _int_matrix(data["gram"], "gram")
    sigma = _int_matrix(data["sigma"], "sigma")
    l = len(gram)
    spec = JobSpec(gram, sigma)
    eps = data.get("eps", {})
    if not isinstance(eps, dict):
        raise InputError("eps must be an object keyed by 'i,j'")
    for key, val in eps.items():
        try:
            i, j = (int(x) for x in key.split(","))
        except ValueError as exc:
            raise InputError(f"bad eps key {key!r}") from exc
        if not (0 <= i < l and 0 <= j < l):
            raise InputError(f"eps key {key!r} out of range")
        spec.eps[(i, j)] = str(val)
    phi = data.get("phi", {})
    if not isinstance(phi, dict):
        raise InputError("phi must be an object keyed by basis index")
    for key, val in phi.items():
        try:
            i = int(key)
        except ValueError as exc:
            raise InputError(f"bad phi key {key!r}") from exc
        if not 0 <= i < l:
            raise InputError(f"phi key {key!r} out of range")
        spec.phi[i] = str(val)
    if "mu" in data:
        if not isinstance(data["mu"], list):
            raise InputError("mu must be a list of scalar strings")
        spec.mu = [str(x) for x in data["mu"]]
    for name in ("trunc", "bound"):
        if name in data:
            if not isinstance(data[name], int) or data[name] < 1:
                raise InputError(f"{name} must be a positive integer")
            setattr(spec, name, data[name])
    for name in ("alpha", "beta"):
        if name in data:
            setattr(spec, name, _int_vector(data[name], l, name))
    return spec


def build_twist(spec: JobSpec) -> TwistData:
    try:
        lat = TwistedLattice(spec.gram, spec.sigma)
    except LatticeError as exc:
        raise InputError(str(exc)) from exc
    eps_seed = build_epsilon(lat)
    phi_seed = None
    try:
        for (i, j), text in spec.eps.items():
            eps_seed[(i, j)] = parse_scalar(text)
        if spec.phi:
            base = TwistData(lat, eps_seed=eps_seed)
            phi_seed = dict(base.phi_seed)
            for i, text in spec.phi.items():
                phi_seed[i] = parse_scalar(text)
        return TwistData(lat, eps_seed=eps_seed, phi_seed=phi_seed)
    except ScalarError as exc:
        raise InputError(str(exc)) from exc
    except CocycleError as exc:
        raise InputError(str(exc)) from exc


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return str(x)


def _vec(v) -> str:
    return "(" + ",".join(_fmt(x) for x in v) + ")"


# ---------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------

def cmd_check(spec: JobSpec, deep: bool = False):
    """Run the invariant suite at the spec's truncation.  Returns
    (lines, exit_code); 'untestable' entries are listed but non-fatal."""
    T = build_twist(spec)
    lat = T.lattice
    l, p = lat.rank, lat.p
    lines = [f"check: rank {l}, order {p}, trunc {spec.trunc}"]
    statuses = []

    def emit(tag, instance, status):
        statuses.append(status)
        lines.append(f"{tag} | {instance} | {status}")

    # kernel route: the delta kernel against its defining sum
    for n in range(-2, 2):
        ok, _d1, _d2 = kernel_delta_check(p, n, max(2, n + 2))
        emit("fl:F", f"delta kernel p={p} n={n}", "pass" if ok else "fail")

    M = FockModule(T, RegularOmega(T, spec.bound), spec.trunc)
    # probe from the center of the vacuum window: edge probes leave the
    # truncation box under e-shifts and test nothing
    center = M.omega.lookup.get((0,) * l, 0)
    probes = [M.vacuum(center)]
    if M.omega.size > 1:
        probes.append(M.vacuum(center - 1 if center else 1))
    slots = [Fraction(k, p) for k in range(-p, p + 1)]
    prod_slots = [Fraction(k, p) for k in range(0, p + 1)]
    basis = [tuple(1 if k == i else 0 for k in range(l)) for i in range(l)]

    for rep in e_group_checks(M, [(a, b) for a in basis for b in basis],
                              probes):
        name, st1, st2 = rep
        emit("fl:eps", name, st1)
        emit("fl:comm", name, st2)

    for name, st in virasoro_element_checks(M, basis, slots, probes):
        emit("fl:Dvir", name, st)

    for name, st in heisenberg_commutation_check(
            M, basis, basis, [0, 1, Fraction(1, p)], probes):
        emit("fl:aff", name, st)

    for alpha in basis:
        for beta in basis:
            n0 = -lat.pairing(alpha, beta) - 1
            for n in (n0, n0 + 1):
                res = product_check(M, alpha, beta, n, prod_slots, probes)
                emit("fl:voprod", f"X{_vec(alpha)}[{n}]X{_vec(beta)}",
                     res["expand_vs_closed"])
                emit("fl:lprod", f"X{_vec(alpha)}[{n}]X{_vec(beta)}",
                     res["expand_vs_kernel"])

    if deep:
        from .fdist import nth_product, series_compare, compare_status
        from .oracle import oracle_product

        for alpha in basis:
            a = M.tilde(alpha)
            for n in (-1, 0, 1):
                main = nth_product(a, a, n, 1)
                orc = oracle_product(a, a, n, 1)
                emit("fl:affprod", f"h{_vec(alpha)}[{n}]h{_vec(alpha)} oracle",
                     compare_status(series_compare(main, orc, slots, probes)))

    worst = worst_status(statuses)
    lines.append(f"result: {worst}")
    return lines, EXIT_OK if worst != "fail" else EXIT_INVARIANT


def cmd_classify(spec: JobSpec):
    """Emit the classification table from the enumerator."""
    T = build_twist(spec)
    lat = T.lattice
    res = enumerate_simple_twisted(T)
    lines = [f"classify: rank {lat.rank}, order {res.order}, "
             f"orbit lengths {list(res.orbit_lengths)}"]
    if res.obstructed:
        lines.append(f"obstructed: witness {res.witness}")
        lines.append("0 classes")
        return lines, EXIT_OK
    lines.append(f"eta cosets: {res.eta_count}")
    entries = res.entries
    if spec.mu is not None:
        try:
            wanted = tuple(parse_scalar(t) for t in spec.mu)
        except ScalarError as exc:
            raise InputError(str(exc)) from exc
        entries = [e for e in entries if e.mu_choice == wanted]
        if not entries:
            raise InputError("mu selection matches no root choice")
    for entry in entries:
        mu = ",".join(str(m) for m in entry.mu_choice)
        if not entry.admissible:
            lines.append(f"mu ({mu}) | inadmissible | {entry.detail}")
            continue
        dims = ",".join(str(d) for d in entry.block_dims)
        lines.append(
            f"mu ({mu}) | dim B0 {entry.dim_B0} | blocks [{dims}] | "
            f"classes {len(entry.classes)}")
        for cls in entry.classes:
            lines.append(
                f"  class | ideal {cls.ideal_index} | "
                f"eta {_vec(cls.eta)} | dim {cls.dimension}")
    lines.append(f"{sum(len(e.classes) for e in entries)} classes")
    return lines, EXIT_OK


def cmd_kappa(spec: JobSpec):
    """Print the exact commutation constant, pairing cocycle, and
    locality order for the spec's vectors alpha, beta."""
    T = build_twist(spec)
    if spec.alpha is None or spec.beta is None:
        raise InputError("the kappa command requires alpha and beta vectors")
    a, b = tuple(spec.alpha), tuple(spec.beta)
    lines = [
        f"alpha {_vec(a)} beta {_vec(b)}",
        f"fl:comm | C(alpha,beta) = {T.commutator(a, b)}",
        f"fl:kappa | kappa(alpha,beta) = {T.kappa(a, b)}",
        f"fl:locality | N(alpha,beta) = {locality_order(T.lattice, a, b)}",
    ]
    return lines, EXIT_OK


def cmd_orbits(spec: JobSpec):
    """Print the reduced generating set and its degree data."""
    T = build_twist(spec)
    lat = T.lattice
    dec = lat.reduce_generating_set()
    lines = [f"orbits: {len(dec.orbits)} (nonzero degree: {dec.m})"]
    for j, orb in enumerate(dec.orbits):
        deg = lat.nu(orb[0])
        kind = "graded" if j < dec.m else "degree-zero"
        lines.append(
            f"orbit {j} | rep {_vec(orb[0])} | length {dec.lengths[j]} | "
            f"{kind} | degree {_vec(deg)}")
    return lines, EXIT_OK


# ---------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="twistlab",
        description="Exact checks and classification for twisted lattice "
                    "module data.")
    parser.add_argument("--spec", required=True, help="job spec JSON file")
    parser.add_argument("--cmd", required=True,
                        choices=["check", "classify", "kappa", "orbits"])
    parser.add_argument("--trunc", type=int, default=None,
                        help="override the spec's truncation")
    parser.add_argument("--out", default=None,
                        help="report file (default: stdout)")
    parser.add_argument("--deep", action="store_true",
                        help="also run the slow oracle cross-checks")
    args = parser.parse_args(argv)

    try:
        with open(args.spec, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    try:
        spec = parse_job(text)
        if args.trunc is not None:
            if args.trunc < 1:
                raise InputError("trunc must be a positive integer")
            spec.trunc = args.trunc
        if args.cmd == "check":
            lines, code = cmd_check(spec, deep=args.deep)
        elif args.cmd == "classify":
            lines, code = cmd_classify(spec)
        elif args.cmd == "kappa":
            lines, code = cmd_kappa(spec)
        else:
            lines, code = cmd_orbits(spec)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConductorOverflow, UnsupportedScalar) as exc:
        print(f"unsupported scalar: {exc}", file=sys.stderr)
        return EXIT_SCALAR
    except (LatticeError, CocycleError, FockError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    report = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report)
    else:
        sys.stdout.write(report)
    return code


if __name__ == "__main__":
    sys.exit(main())
