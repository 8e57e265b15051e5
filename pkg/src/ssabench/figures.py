"""Finite lattice regions in Z^nu and their congruence classes.

A figure is a non-empty finite set of integer cells. Cells are identified
with closed unit cubes, so a figure need not be connected. Congruence is
taken with respect to a :class:`SymmetryGroup`.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from math import lcm
from typing import Iterable, Sequence

Cell = tuple[int, ...]
CanonicalKey = tuple[Cell, ...]


class DimensionMismatch(ValueError):
    pass


class SymmetryGroup(enum.Enum):
    """Group acting on figures, always including all lattice translations.

    ``IDENTITY`` performs no quotient at all: every concrete placement is its
    own class. It is used when the translation axiom is switched off.
    """

    IDENTITY = "identity"
    TRANSLATIONS = "translations"
    FULL = "full"

    @classmethod
    def parse(cls, value: "str | SymmetryGroup") -> "SymmetryGroup":
        if isinstance(value, cls):
            return value
        aliases = {"translations-only": "translations", "hyperoctahedral": "full"}
        try:
            return cls(aliases.get(value, value))
        except ValueError:
            raise ValueError(
                f"unknown symmetry group {value!r}; "
                "expected 'identity', 'translations' or 'full'") from None


class _Empty:
    """Marker for an empty intersection (no entropy variable exists for it)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "EMPTY"

    def __bool__(self):
        return False


EMPTY = _Empty()


@dataclass(frozen=True)
class Figure:
    cells: frozenset

    def __post_init__(self):
        cells = frozenset(tuple(int(x) for x in c) for c in self.cells)
        if not cells:
            raise ValueError("a figure must contain at least one cell")
        dims = {len(c) for c in cells}
        if len(dims) != 1:
            raise DimensionMismatch(f"cells of mixed dimension {sorted(dims)}")
        if 0 in dims:
            raise ValueError("cells need at least one coordinate")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def of(cls, cells: Iterable[Sequence[int]]) -> "Figure":
        return cls(frozenset(tuple(c) for c in cells))

    @property
    def nu(self) -> int:
        return len(next(iter(self.cells)))

    def volume(self) -> int:
        return len(self.cells)

    def sorted_cells(self) -> list[Cell]:
        return sorted(self.cells)

    def lower(self) -> Cell:
        return tuple(min(c[i] for c in self.cells) for i in range(self.nu))

    def upper(self) -> Cell:
        return tuple(max(c[i] for c in self.cells) for i in range(self.nu))

    def extent(self) -> Cell:
        lo, hi = self.lower(), self.upper()
        return tuple(h - l + 1 for l, h in zip(lo, hi))

    def translate(self, shift: Sequence[int]) -> "Figure":
        if len(shift) != self.nu:
            raise DimensionMismatch("shift has wrong dimension")
        return Figure(frozenset(tuple(x + s for x, s in zip(c, shift)) for c in self.cells))

    def normalized(self) -> "Figure":
        """Translate so the bounding box starts at the origin."""
        lo = self.lower()
        return self.translate(tuple(-x for x in lo))

    def to_json(self) -> dict:
        return {"nu": self.nu, "cells": [list(c) for c in self.sorted_cells()]}

    @classmethod
    def from_json(cls, obj: dict) -> "Figure":
        if not isinstance(obj, dict) or "cells" not in obj:
            raise ValueError("figure JSON needs a 'cells' field")
        fig = cls.of(obj["cells"])
        if "nu" in obj and obj["nu"] != fig.nu:
            raise DimensionMismatch(f"'nu' is {obj['nu']} but cells have dimension {fig.nu}")
        return fig

    def __repr__(self):
        return f"Figure({self.sorted_cells()})"


def box(a: Sequence[int]) -> Figure:
    """The box with side lengths ``a``, lowest corner at the origin."""
    a = tuple(a)
    if not a:
        raise ValueError("box needs at least one side length")
    if any(int(x) != x or x < 1 for x in a):
        raise ValueError(f"box side lengths must be positive integers, got {a}")
    return Figure(frozenset(itertools.product(*(range(int(x)) for x in a))))


def rational_box(sides: Sequence) -> tuple[Figure, int]:
    """Lattice stand-in for a continuum box with rational sides.

    Returns the lattice box over the common denominator ``c`` together with
    ``c``; a continuum volume ``v`` corresponds to ``v * c**nu`` cells.
    Floats are refused since their rationality cannot be certified.
    """
    fr = []
    for s in sides:
        if isinstance(s, float) or not isinstance(s, (int, Fraction, str)):
            raise TypeError(f"side {s!r} is not an exact rational; pass int, Fraction or 'p/q'")
        q = Fraction(s)
        if q <= 0:
            raise ValueError("continuum side lengths must be positive")
        fr.append(q)
    c = lcm(*(q.denominator for q in fr))
    return box(tuple(int(q * c) for q in fr)), c


def _check_dims(f: Figure, g: Figure) -> None:
    if f.nu != g.nu:
        raise DimensionMismatch(f"figures live in Z^{f.nu} and Z^{g.nu}")


def union(f: Figure, g: Figure) -> Figure:
    _check_dims(f, g)
    return Figure(f.cells | g.cells)


def intersect(f: Figure, g: Figure) -> "Figure | _Empty":
    _check_dims(f, g)
    common = f.cells & g.cells
    return Figure(common) if common else EMPTY


def is_subset(f: Figure, g: Figure) -> bool:
    _check_dims(f, g)
    return f.cells <= g.cells


def volume(f: Figure) -> int:
    return f.volume()


@lru_cache(maxsize=None)
def orientations(nu: int, group: SymmetryGroup) -> tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]:
    """Point-group elements as (axis permutation, signs), identity first."""
    ident = (tuple(range(nu)), (1,) * nu)
    if group is not SymmetryGroup.FULL:
        return (ident,)
    out = []
    for perm in itertools.permutations(range(nu)):
        for signs in itertools.product((1, -1), repeat=nu):
            out.append((perm, signs))
    out.sort(key=lambda e: (e != ident, e))
    return tuple(out)


def apply_orientation(cells: Iterable[Cell], element) -> list[Cell]:
    perm, signs = element
    return [tuple(signs[i] * c[perm[i]] for i in range(len(perm))) for c in cells]


def _key_of(cells: list[Cell]) -> CanonicalKey:
    cells = sorted(cells)
    o = cells[0]
    return tuple(tuple(x - y for x, y in zip(c, o)) for c in cells)


def canonicalize(f: Figure, group: "SymmetryGroup | str") -> CanonicalKey:
    """Orbit-minimal cell list, translated so its smallest cell is the origin.

    Under ``IDENTITY`` no translation is applied and the key is the sorted
    cell list itself.
    """
    group = SymmetryGroup.parse(group)
    if group is SymmetryGroup.IDENTITY:
        return tuple(sorted(f.cells))
    return min(_key_of(apply_orientation(f.cells, e)) for e in orientations(f.nu, group))


def congruent(f: Figure, g: Figure, group: "SymmetryGroup | str") -> bool:
    _check_dims(f, g)
    if f.volume() != g.volume():
        return False
    return canonicalize(f, group) == canonicalize(g, group)


def figure_of_key(key: CanonicalKey) -> Figure:
    return Figure(frozenset(key))


def images(f: Figure, group: "SymmetryGroup | str") -> list[Figure]:
    """Distinct point-group images of ``f``, each normalized to the origin."""
    group = SymmetryGroup.parse(group)
    seen = {}
    for e in orientations(f.nu, group):
        g = Figure(frozenset(apply_orientation(f.cells, e))).normalized()
        seen.setdefault(g.cells, g)
    return list(seen.values())


def render(f: Figure, gap: str = ".") -> str:
    """ASCII picture, one ``#`` per cell, top row first."""
    if f.nu == 1:
        lo, hi = f.lower()[0], f.upper()[0]
        return "".join("#" if (x,) in f.cells else gap for x in range(lo, hi + 1))
    if f.nu != 2:
        raise ValueError("only 1-D and 2-D figures can be drawn")
    (x0, y0), (x1, y1) = f.lower(), f.upper()
    rows = []
    for y in range(y1, y0 - 1, -1):
        rows.append("".join("#" if (x, y) in f.cells else gap for x in range(x0, x1 + 1)))
    return "\n".join(rows)


def staircase(n: int) -> Figure:
    """First ``n`` cells of the diagonal staircase (0,0),(1,0),(1,1),(2,1),..."""
    if n < 1:
        raise ValueError("staircase needs n >= 1")
    cells = [((k + 1) // 2, k // 2) for k in range(n)]
    return Figure.of(cells)


def load_catalog() -> dict[str, Figure]:
    """Named figures bundled with the package."""
    text = resources.files("ssabench.data").joinpath("catalog.json").read_text()
    raw = json.loads(text)
    return {name: Figure.from_json(obj) for name, obj in raw["figures"].items()}


def load_figure(path) -> Figure:
    with open(path) as fh:
        return Figure.from_json(json.load(fh))
