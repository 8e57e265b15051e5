"""Exact derivability of entropy inequalities from axiom instances.

A target form ``t . S >= 0`` follows from constraints ``g_j . S >= 0`` iff
``t = sum_j lam_j g_j`` with ``lam >= 0``. We decide this Farkas system with
a revised primal simplex in rational arithmetic with anti-cycling pivoting, so the
answer is either a certificate ``lam`` or, from the phase-one duals, a
pseudo-entropy assignment ``w`` with ``g_j . w >= 0`` for every j and
``t . w < 0``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpq
from scipy import sparse

from .universe import (
    KINDS,
    Constraint,
    RegionUniverse,
    Target,
    UniverseError,
    generate_constraints,
    nested_pairs,
    target_average_entropy,
    target_mean_monotone,
)

log = logging.getLogger(__name__)

MAX_CONSTRAINTS = 20_000
MAX_CLASSES = 2_000
_CANDIDATES = 8


class ProverLimitError(UniverseError):
    pass


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class Certificate:
    multipliers: tuple[tuple[int, Fraction], ...]
    kinds: tuple[str, ...] = KINDS


@dataclass(frozen=True)
class Witness:
    values: tuple[Fraction, ...]
    kinds: tuple[str, ...] = KINDS


@dataclass(frozen=True)
class Derivable:
    certificate: Certificate
    pivots: int = 0

    derivable = True


@dataclass(frozen=True)
class UnknownWithinUniverse:
    witness: Witness
    pivots: int = 0

    derivable = False


ProveResult = Derivable | UnknownWithinUniverse


def _to_fraction(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def solve_farkas(columns: Sequence[dict[int, int]], rhs: dict[int, Fraction], m: int,
                 max_pivots: int = 1_000_000, rule: str = "dantzig"):
    """Find ``lam >= 0`` with ``sum_j lam_j columns[j] = rhs`` over ``m`` rows.

    Returns ``(True, {j: lam_j}, pivots)`` or ``(False, y, pivots)`` where ``y``
    (length ``m``) satisfies ``y . col >= 0`` for all columns and
    ``y . rhs < 0``. Everything is exact.

    ``rule="bland"``: lowest-index improving column, ratio ties to the
    lowest basic variable. ``rule="dantzig"``: most negative reduced cost
    (ranked in floating point, confirmed exactly) with the lexicographic
    ratio test. Both rules rule out cycling; optimality is always decided by
    an exact scan.
    """
    if rule not in ("bland", "dantzig"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    k = len(columns)
    sign = [1] * m
    b = [mpq(0)] * m
    for i, v in rhs.items():
        v = mpq(v.numerator, v.denominator) if isinstance(v, Fraction) else mpq(v)
        if v < 0:
            sign[i] = -1
            v = -v
        b[i] = v
    cols = [[(i, mpq(sign[i] * v)) for i, v in sorted(c.items()) if v] for c in columns]
    if rule == "dantzig" and k:
        ri = [i for c in cols for i, _ in c]
        ci = [j for j, c in enumerate(cols) for _ in c]
        vals = [float(v) for c in cols for _, v in c]
        at = sparse.csr_matrix((vals, (ci, ri)), shape=(k, m))

    # basis: variable ids 0..k-1 are multipliers, k+i is the artificial of row i
    basis = [k + i for i in range(m)]
    binv = [[mpq(1) if r == c else mpq(0) for c in range(m)] for r in range(m)]
    x = list(b)
    y = [mpq(1)] * m  # phase-one duals c_B B^-1, all artificials cost 1
    pivots = 0
    one = mpq(1)
    while True:
        enter = -1
        if rule == "dantzig" and k:
            d = -(at @ np.array([float(v) for v in y]))
            for j in np.argsort(d, kind="stable")[:_CANDIDATES]:
                if d[j] >= 0:
                    break
                if sum(y[i] * v for i, v in cols[j]) > 0:
                    enter = int(j)
                    break
        if enter < 0:
            for j in range(k):
                if cols[j] and sum(y[i] * v for i, v in cols[j]) > 0:
                    enter = j
                    break
        if enter < 0:
            break
        col = cols[enter]
        u = [sum(row[i] * v for i, v in col) for row in binv]
        leave = -1
        best = None
        ties = []
        for r in range(m):
            if u[r] > 0:
                ratio = x[r] / u[r]
                if best is None or ratio < best:
                    best, ties = ratio, [r]
                elif ratio == best:
                    ties.append(r)
        if not ties:
            raise SolverError("phase-one problem reported unbounded")
        if rule == "bland" or len(ties) == 1:
            leave = min(ties, key=lambda r: basis[r])
        else:
            leave = _lex_min_row(ties, binv, u, m)
        pivots += 1
        if pivots > max_pivots:
            raise SolverError(f"pivot limit {max_pivots} exceeded")
        d_enter = -sum(y[i] * v for i, v in col)
        piv = u[leave]
        rrow = binv[leave]
        theta_d = d_enter / piv
        # dual update uses the old row of B^-1
        y = [yi + theta_d * ri if ri else yi for yi, ri in zip(y, rrow)]
        inv = one / piv
        rrow = [v * inv if v else v for v in rrow]
        binv[leave] = rrow
        xr = x[leave] * inv
        nz = [(c, v) for c, v in enumerate(rrow) if v]
        for i in range(m):
            if i == leave or not u[i]:
                continue
            f = u[i]
            row = binv[i]
            for c, v in nz:
                row[c] -= f * v
            x[i] -= f * xr
        x[leave] = xr
        basis[leave] = enter
    objective = sum(x[r] for r in range(m) if basis[r] >= k)
    if objective == 0:
        lam = {basis[r]: x[r] for r in range(m) if basis[r] < k and x[r] != 0}
        return True, lam, pivots
    # phase-one optimum > 0: y . a_j <= 0 for every multiplier column of the
    # sign-adjusted system, and y . b > 0; undo row signs and negate.
    w = [-sign[i] * y[i] for i in range(m)]
    return False, w, pivots


def _lex_min_row(rows: list[int], binv, u, m: int) -> int:
    """Row minimizing ``binv[r] / u[r]`` lexicographically (rows of B^-1 are independent)."""
    for c in range(m):
        vals = [binv[r][c] / u[r] for r in rows]
        lo = min(vals)
        rows = [r for r, v in zip(rows, vals) if v == lo]
        if len(rows) == 1:
            break
    return rows[0]


def _columns(cons: Sequence[Constraint]) -> list[dict[int, int]]:
    return [dict(c.coeffs) for c in cons]


def _check_limits(u: RegionUniverse, cons) -> None:
    if len(u) > MAX_CLASSES:
        raise ProverLimitError(f"universe has {len(u)} classes; limit is {MAX_CLASSES}")
    if len(cons) > MAX_CONSTRAINTS:
        raise ProverLimitError(f"universe has {len(cons)} constraints; limit is {MAX_CONSTRAINTS}")


def _check_target(u: RegionUniverse, t: Target) -> None:
    for i, _ in t.coeffs:
        if not 0 <= i < len(u):
            raise UniverseError(f"target refers to class {i} outside the universe")


def prove(u: RegionUniverse, t: Target, kinds: Iterable[str] = KINDS,
          rule: str = "dantzig", allowed: Iterable[int] | None = None) -> ProveResult:
    """Decide whether ``t`` is a non-negative combination of the axiom instances.

    ``kinds`` selects which axioms are available (e.g. ``("SA", "SSA")`` to
    drop positivity). ``allowed`` optionally restricts the instances to these
    indices of ``generate_constraints(u, kinds)``; certificates keep the full
    indexing and witnesses then satisfy only the allowed instances. The
    returned certificate or witness has already been re-checked exactly.
    """
    kinds = tuple(k for k in KINDS if k in set(kinds))
    _check_target(u, t)
    cons = generate_constraints(u, kinds)
    _check_limits(u, cons)
    if t.is_zero():
        return Derivable(Certificate((), kinds))
    idx = sorted(set(allowed)) if allowed is not None else list(range(len(cons)))
    if idx and not 0 <= idx[0] <= idx[-1] < len(cons):
        raise UniverseError("allowed constraint index out of range")
    ok, sol, pivots = solve_farkas(_columns([cons[j] for j in idx]), t.as_dict(), len(u), rule=rule)
    if ok:
        cert = Certificate(tuple((idx[j], _to_fraction(v)) for j, v in sorted(sol.items())), kinds)
        if not verify_certificate(u, t, cert):
            raise SolverError("certificate failed exact re-verification")
        return Derivable(cert, pivots)
    wit = Witness(tuple(_to_fraction(v) for v in _integral(sol)), kinds)
    if not verify_witness(u, t, wit, None if allowed is None else idx):
        raise SolverError("witness failed exact re-verification")
    return UnknownWithinUniverse(wit, pivots)


def prove_disjunction(u: RegionUniverse, a: Target, b: Target, kinds: Iterable[str] = KINDS,
                      allowed: Iterable[int] | None = None) -> tuple[Fraction, Fraction] | None:
    """Weights ``(p, q)``, ``p + q = 1``, with ``p a + q b`` derivable, or None.

    Such weights show that ``max(a, b) >= 0`` in every model of the axioms.
    One extra row pins ``p + q = 1``; the two targets enter as columns.
    """
    kinds = tuple(k for k in KINDS if k in set(kinds))
    _check_target(u, a)
    _check_target(u, b)
    cons = generate_constraints(u, kinds)
    _check_limits(u, cons)
    idx = sorted(set(allowed)) if allowed is not None else list(range(len(cons)))
    m = len(u)
    cols = _columns([cons[j] for j in idx])
    for t in (a, b):
        col = {i: -c for i, c in t.coeffs}
        col[m] = 1
        cols.append(col)
    ok, sol, _ = solve_farkas(cols, {m: Fraction(1)}, m + 1)
    if not ok:
        return None
    p, q = _to_fraction(sol.get(len(idx), 0)), _to_fraction(sol.get(len(idx) + 1, 0))
    combo = Target(tuple(sorted((i, c) for i, c in
                                _add_forms(a.coeffs, b.coeffs, p, q).items() if c)), "disjunction")
    cert = Certificate(tuple((idx[j], _to_fraction(v)) for j, v in sorted(sol.items()) if j < len(idx)), kinds)
    if not verify_certificate(u, combo, cert):
        raise SolverError("disjunction certificate failed exact re-verification")
    return p, q


def _add_forms(x, y, p: Fraction, q: Fraction) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for co, w in ((x, p), (y, q)):
        for i, c in co:
            out[i] = out.get(i, Fraction(0)) + w * Fraction(c)
    return out


def _integral(w: Sequence) -> list:
    """Scale a rational vector to coprime integers (direction unchanged)."""
    den = 1
    for v in w:
        den = gmpy2.lcm(den, v.denominator)
    ints = [v * den for v in w]
    g = 0
    for v in ints:
        g = gmpy2.gcd(g, int(v))
    if g > 1:
        ints = [v / g for v in ints]
    return [mpq(v) for v in ints]


def verify_certificate(u: RegionUniverse, t: Target, c: Certificate) -> bool:
    """Recompute ``sum lam_j g_j`` exactly and compare with the target."""
    cons = generate_constraints(u, c.kinds)
    total: dict[int, Fraction] = {}
    for j, lam in c.multipliers:
        if not 0 <= j < len(cons) or not lam > 0:
            return False
        for i, v in cons[j].coeffs:
            total[i] = total.get(i, Fraction(0)) + lam * v
    total = {i: v for i, v in total.items() if v != 0}
    return total == dict(t.coeffs)


def verify_witness(u: RegionUniverse, t: Target, w: Witness,
                   allowed: Iterable[int] | None = None) -> bool:
    """Exact check: every (allowed) constraint holds at ``w`` and the target is violated."""
    if len(w.values) != len(u):
        return False
    cons = generate_constraints(u, w.kinds)
    if allowed is not None:
        cons = [cons[j] for j in allowed]
    for con in cons:
        if sum(v * w.values[i] for i, v in con.coeffs) < 0:
            return False
    return sum(c * w.values[i] for i, c in t.coeffs) < 0


def format_form(u: RegionUniverse, coeffs) -> str:
    parts = []
    for i, c in coeffs:
        c = Fraction(c)
        mag = "" if abs(c) == 1 else f"{abs(c)}*"
        parts.append(("- " if c < 0 else "+ ") + f"{mag}S({u.name_of(i)})")
    text = " ".join(parts).lstrip("+ ")
    return (text or "0") + " >= 0"


def pretty_certificate(u: RegionUniverse, t: Target, c: Certificate) -> str:
    """Human-readable proof: multipliers grouped by axiom kind."""
    cons = generate_constraints(u, c.kinds)
    lines = [f"target: {format_form(u, t.coeffs)}"]
    for kind in KINDS:
        used = [(j, lam) for j, lam in c.multipliers if cons[j].kind == kind]
        if not used:
            continue
        lines.append(f"{kind}:")
        for j, lam in used:
            lines.append(f"  {lam} x [{format_form(u, cons[j].coeffs)}]")
    return "\n".join(lines)


def certificate_json(u: RegionUniverse, t: Target, c: Certificate) -> dict:
    cons = generate_constraints(u, c.kinds)
    return {
        "target": target_json(u, t),
        "axioms": list(c.kinds),
        "multipliers": [
            {"constraint": j, "kind": cons[j].kind, "lambda": str(lam),
             "form": {u.name_of(i): v for i, v in cons[j].coeffs}}
            for j, lam in c.multipliers
        ],
        "verified": verify_certificate(u, t, c),
    }


def witness_json(u: RegionUniverse, t: Target, w: Witness) -> dict:
    return {
        "target": target_json(u, t),
        "axioms": list(w.kinds),
        "values": {u.name_of(i): str(v) for i, v in enumerate(w.values)},
        "target_value": str(sum(c * w.values[i] for i, c in t.coeffs)),
        "verified": verify_witness(u, t, w),
    }


def target_json(u: RegionUniverse, t: Target) -> dict:
    return {"description": t.description,
            "coeffs": {u.name_of(i): str(c) for i, c in t.coeffs}}


def result_json(u: RegionUniverse, t: Target, r: ProveResult) -> dict:
    if isinstance(r, Derivable):
        body = certificate_json(u, t, r.certificate)
        status = "derivable"
    else:
        body = witness_json(u, t, r.witness)
        status = "unknown_within_universe"
    return {"status": status, "pivots": r.pivots, **body}


@dataclass
class ScanReport:
    universe: dict
    pairs: list[dict] = field(default_factory=list)
    averages: list[dict] = field(default_factory=list)
    extra: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"universe": self.universe, "pairs": self.pairs,
                "averages": self.averages, "targets": self.extra}


def scan(u: RegionUniverse, pairs: Iterable[tuple] | None = None, figures: Iterable = (),
         targets: Iterable[Target] = (), kinds: Iterable[str] = KINDS) -> ScanReport:
    """Classify mean-entropy targets for nested pairs plus extra targets.

    ``pairs`` defaults to every nested pair of distinct classes. ``figures``
    get the average-of-subfigures target; a figure whose one-cell removals
    are not all classes is reported as ``not_expressible``.
    """
    kinds = tuple(kinds)
    if pairs is None:
        pairs = nested_pairs(u)
    rep = ScanReport(universe=u.describe())
    for a, b in pairs:
        t = target_mean_monotone(a, b, u)
        r = prove(u, t, kinds)
        rep.pairs.append({"A": u.name_of(u.class_of(a)), "B": u.name_of(u.class_of(b)),
                          "status": "derivable" if r.derivable else "unknown_within_universe"})
    for f in figures:
        try:
            t = target_average_entropy(f, u)
        except UniverseError as e:
            rep.averages.append({"figure": [list(c) for c in f.sorted_cells()],
                                 "status": "not_expressible", "reason": str(e)})
            continue
        r = prove(u, t, kinds)
        rep.averages.append({"figure": [list(c) for c in f.sorted_cells()],
                             "status": "derivable" if r.derivable else "unknown_within_universe"})
    for t in targets:
        r = prove(u, t, kinds)
        rep.extra.append({"target": t.description,
                          "status": "derivable" if r.derivable else "unknown_within_universe"})
    return rep
