"""Correlation entropies of one-dimensional entropy sequences.

A sequence ``s[0..n-1]`` holds ``S(1), ..., S(n)``: the entropies of runs of
1..n consecutive sites. Indices in the public functions are 1-based in the
sense of run length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .universe import RegionUniverse

DEFAULT_TOL = 1e-9


def _as_sequence(s: Sequence[float]) -> np.ndarray:
    a = np.asarray(s, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("entropy sequence must be a non-empty 1-D list")
    if not np.all(np.isfinite(a)):
        raise ValueError("entropy sequence contains non-finite values")
    return a


def index_of_correlation(s: Sequence[float], n: int) -> float:
    """``n S(1) - S(n)``."""
    a = _as_sequence(s)
    if not 1 <= n <= a.size:
        raise IndexError(f"n={n} outside 1..{a.size}")
    return float(n * a[0] - a[n - 1])


def correlation_entropies(s: Sequence[float]) -> list[float]:
    """``S^c_m`` for ``m = 2..n``: ``2S(1)-S(2)`` then ``2S(m-1)-S(m-2)-S(m)``."""
    a = _as_sequence(s)
    if a.size < 2:
        raise ValueError("need at least S(1) and S(2)")
    out = [float(2 * a[0] - a[1])]
    for m in range(3, a.size + 1):
        out.append(float(2 * a[m - 2] - a[m - 3] - a[m - 1]))
    return out


def reconstruct_from(s1: float, corr: Sequence[float]) -> list[float]:
    """``S(n) = n S(1) - sum_{m=2}^n (n+1-m) S^c_m`` for n = 1..len(corr)+1."""
    out = [float(s1)]
    for n in range(2, len(corr) + 2):
        out.append(float(n * s1 - sum((n + 1 - m) * corr[m - 2] for m in range(2, n + 1))))
    return out


def reconstruct(s: Sequence[float]) -> list[float]:
    a = _as_sequence(s)
    if a.size == 1:
        return [float(a[0])]
    return reconstruct_from(a[0], correlation_entropies(a))


def index_identity_error(s: Sequence[float]) -> float:
    """Largest ``|I_n - sum_m (n+1-m) S^c_m|`` over n = 2..len."""
    a = _as_sequence(s)
    if a.size < 2:
        return 0.0
    corr = correlation_entropies(a)
    err = 0.0
    for n in range(2, a.size + 1):
        rhs = sum((n + 1 - m) * corr[m - 2] for m in range(2, n + 1))
        err = max(err, abs(index_of_correlation(a, n) - rhs))
    return err


def telescoping_error(s: Sequence[float]) -> float:
    """Largest ``|S(1) - sum_{m<=N} S^c_m - (S(N) - S(N-1))|`` over N = 2..len."""
    a = _as_sequence(s)
    if a.size < 2:
        return 0.0
    corr = np.cumsum(correlation_entropies(a))
    return float(np.max(np.abs(a[0] - corr - (a[1:] - a[:-1]))))


@dataclass
class IncrementReport:
    mean_limit: float
    tol: float
    increments: list[float]
    margins: list[float]
    nonneg_margins: list[float]
    label: str = "analytic"

    @property
    def ok(self) -> bool:
        return all(m >= -self.tol for m in self.margins) and all(
            m >= -self.tol for m in self.nonneg_margins)

    def to_json(self) -> dict:
        return {"ok": self.ok, "mean_limit": self.mean_limit, "mean_limit_source": self.label,
                "tol": self.tol, "increments": self.increments,
                "margins": self.margins, "nonnegative_margins": self.nonneg_margins}


def increment_bound_check(s: Sequence[float], mean_limit: float | None = None,
                          tol: float = DEFAULT_TOL) -> IncrementReport:
    """Signed margins of ``S(N)-S(N-1) >= mean_limit`` and ``>= 0`` for N >= 2.

    Without an analytic ``mean_limit`` the bound ``min_k S(k)/k`` is used and
    the report is labeled accordingly: it is only an upper estimate of the
    limit, so failures against it are weaker evidence.
    """
    a = _as_sequence(s)
    label = "analytic"
    if mean_limit is None:
        mean_limit = float(np.min(a / np.arange(1, a.size + 1)))
        label = "upper_bound_min_S(k)/k"
    inc = [float(x) for x in a[1:] - a[:-1]]
    return IncrementReport(float(mean_limit), tol, inc,
                           [d - mean_limit for d in inc], list(inc), label)


@dataclass
class DecompositionReport:
    values: list[float]
    index: list[float]
    correlation: list[float]
    reconstruction_error: float
    index_identity_error: float
    telescoping_error: float
    increments: IncrementReport | None = None

    def to_json(self) -> dict:
        out = {"S": self.values, "I": self.index, "S_c": self.correlation,
               "reconstruction_error": self.reconstruction_error,
               "index_identity_error": self.index_identity_error,
               "telescoping_error": self.telescoping_error}
        if self.increments is not None:
            out["increments"] = self.increments.to_json()
        return out


def decompose(s: Sequence[float], mean_limit: float | None = None,
              tol: float = DEFAULT_TOL) -> DecompositionReport:
    a = _as_sequence(s)
    rec = reconstruct(a)
    corr = correlation_entropies(a) if a.size >= 2 else []
    return DecompositionReport(
        values=[float(x) for x in a],
        index=[index_of_correlation(a, n) for n in range(1, a.size + 1)],
        correlation=corr,
        reconstruction_error=float(np.max(np.abs(np.asarray(rec) - a))),
        index_identity_error=index_identity_error(a),
        telescoping_error=telescoping_error(a),
        increments=increment_bound_check(a, mean_limit, tol) if a.size >= 2 else None,
    )


@dataclass
class PurityReport:
    ok: bool
    skipped: bool = False
    note: str = ""
    pure_class: str | None = None
    offending: tuple | None = None
    bound: float = 0.0
    values: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"ok": self.ok, "skipped": self.skipped, "note": self.note,
                "pure_class": self.pure_class,
                "offending": list(self.offending) if self.offending else None,
                "bound": self.bound}


def purity_propagation(table, u: RegionUniverse, tol: float = DEFAULT_TOL) -> PurityReport:
    """If some box has entropy ``<= tol`` then every box must be near zero.

    On an infinite translation-invariant lattice a vanishing box entropy
    forces all box entropies to vanish. Finite rings are exempt: the full
    ring of a GHZ state is pure while its arcs are not.
    """
    if getattr(table, "topology", "line") in ("ring", "torus"):
        return PurityReport(True, skipped=True,
                            note=f"{table.topology} topology: finite periodic systems may be "
                                 "globally pure with mixed subregions; check requires an infinite lattice")
    boxes = [i for i in range(len(u)) if not u.abstract and _is_box(u, i)]
    if not boxes:
        return PurityReport(True, skipped=True, note="universe contains no boxes")
    vols = [float(u.volumes[i]) for i in boxes]
    ratio = max(vols) / min(vols)
    bound = tol * ratio
    pure = [i for i in boxes if table[i] <= tol]
    if not pure:
        return PurityReport(True, note="no box has vanishing entropy", bound=bound)
    src = min(pure, key=lambda i: (table[i], i))
    worst = max(boxes, key=lambda i: (table[i], -i))
    ok = table[worst] <= bound
    return PurityReport(ok, pure_class=u.name_of(src),
                        offending=None if ok else (u.name_of(src), u.name_of(worst), table[worst]),
                        bound=bound,
                        note="" if ok else "a box has zero entropy while another does not")


def _is_box(u: RegionUniverse, i: int) -> bool:
    f = u.figures[i]
    return f.volume() == math.prod(f.extent())
