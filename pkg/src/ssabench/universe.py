"""Region universes and the axiom instances they carry.

A universe is a finite list of congruence classes (entropy variables).
Concrete universes are generated from lattice figures inside a window;
abstract ones are read from JSON and list their union/intersection
relations explicitly (used for the triangular-lattice hexagon argument
and for rings).
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .figures import (
    CanonicalKey,
    Figure,
    SymmetryGroup,
    canonicalize,
    figure_of_key,
    images,
    load_catalog,
)

log = logging.getLogger(__name__)

DEFAULT_WINDOW_2D = (6, 6)
DEFAULT_MAX_CELLS = 12
DEFAULT_MAX_ROUNDS = 2
DEFAULT_MAX_CLASSES = 2000

KINDS = ("POS", "SA", "SSA")


class UniverseError(ValueError):
    pass


@dataclass(frozen=True)
class Constraint:
    """Linear form ``sum(coeff * S(class)) >= 0`` from one axiom instance."""

    kind: str
    coeffs: tuple[tuple[int, int], ...]
    provenance: tuple = ()

    def as_dict(self) -> dict[int, int]:
        return dict(self.coeffs)


@dataclass(frozen=True)
class Target:
    """Linear form ``sum(coeff * S(class)) >= 0`` to be derived."""

    coeffs: tuple[tuple[int, Fraction], ...]
    description: str = ""

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def evaluate(self, values: Mapping[int, float] | Sequence[float]) -> float:
        return float(sum(float(c) * float(values[i]) for i, c in self.coeffs))


@dataclass
class RegionUniverse:
    group: SymmetryGroup
    keys: list
    volumes: list[Fraction]
    figures: list[Figure | None]
    names: dict[str, int] = field(default_factory=dict)
    nu: int | None = None
    window: tuple[int, ...] | None = None
    relations: list[tuple[int, int, int, int | None]] | None = None
    complete: bool = True
    budget: dict = field(default_factory=dict)
    contains: dict[int, set[int]] | None = None

    def __post_init__(self):
        self.index = {k: i for i, k in enumerate(self.keys)}
        self._constraints: dict[tuple, list[Constraint]] = {}

    def __len__(self):
        return len(self.keys)

    @property
    def abstract(self) -> bool:
        return self.relations is not None

    def name_of(self, i: int) -> str:
        for name, j in self.names.items():
            if j == i:
                return name
        return f"c{i}"

    def class_of(self, ref) -> int:
        """Class index for a name, a Figure or a class index."""
        if isinstance(ref, (int, np.integer)):
            if not 0 <= ref < len(self.keys):
                raise UniverseError(f"class index {ref} out of range")
            return int(ref)
        if isinstance(ref, Figure):
            if self.abstract:
                raise UniverseError("abstract universes have no lattice figures")
            key = canonicalize(ref, self.group)
            if key not in self.index:
                raise UniverseError(f"figure {ref!r} is not a class of this universe")
            return self.index[key]
        if isinstance(ref, str):
            if ref in self.names:
                return self.names[ref]
            if ref.startswith("c") and ref[1:].isdigit():
                return self.class_of(int(ref[1:]))
            if not self.abstract:
                cat = load_catalog()
                if ref in cat:
                    return self.class_of(cat[ref])
            raise UniverseError(f"unknown region name {ref!r}")
        raise UniverseError(f"cannot resolve region reference {ref!r}")

    def fits(self, fig: Figure) -> bool:
        return _fits(fig, self.window, self.group)

    def placements(self, i: int) -> list[Figure]:
        """All concrete placements of class ``i`` inside the window."""
        if self.abstract:
            raise UniverseError("abstract universes have no placements")
        rep = self.figures[i]
        if self.group is SymmetryGroup.IDENTITY:
            return [rep]
        out = []
        for img in images(rep, self.group):
            ext = img.extent()
            ranges = [range(w - e + 1) for w, e in zip(self.window, ext)]
            for shift in np.ndindex(*[len(r) for r in ranges]):
                out.append(img.translate(tuple(int(s) for s in shift)))
        return sorted(out, key=lambda f: f.sorted_cells())

    def is_subclass(self, a: int, b: int) -> bool:
        """Does some placement of class ``a`` lie inside class ``b``?"""
        if a == b:
            return True
        if self.abstract:
            return a in (self.contains or {}).get(b, set())
        big = self.figures[b].cells
        for img in images(self.figures[a], self.group):
            if self.group is SymmetryGroup.IDENTITY:
                if img.cells <= big:
                    return True
                continue
            ext = img.extent()
            lo = self.figures[b].lower()
            bext = self.figures[b].extent()
            for shift in np.ndindex(*[max(0, be - e + 1) for be, e in zip(bext, ext)]):
                moved = {tuple(x + s + l for x, s, l in zip(c, shift, lo)) for c in img.cells}
                if moved <= big:
                    return True
        return False

    def describe(self) -> dict:
        return {
            "classes": len(self.keys),
            "group": self.group.value,
            "window": list(self.window) if self.window else None,
            "complete": self.complete,
            "budget": dict(self.budget),
            "abstract": self.abstract,
        }


def _fits(fig: Figure, window, group: SymmetryGroup) -> bool:
    if window is None:
        return True
    ext = fig.extent()
    if len(ext) != len(window):
        return False
    if group is SymmetryGroup.FULL:
        return all(e <= w for e, w in zip(sorted(ext), sorted(window)))
    return all(e <= w for e, w in zip(ext, window))


def _sorted_universe(classes: dict[CanonicalKey, Figure], group, nu, window,
                     complete=True, budget=None) -> RegionUniverse:
    keys = sorted(classes, key=lambda k: (len(k), k))
    figs = [classes[k] for k in keys]
    u = RegionUniverse(
        group=group, keys=keys, volumes=[Fraction(len(k)) for k in keys], figures=figs,
        nu=nu, window=tuple(window) if window is not None else None,
        complete=complete, budget=budget or {})
    _attach_catalog_names(u)
    return u


def _attach_catalog_names(u: RegionUniverse) -> None:
    if u.group is SymmetryGroup.IDENTITY:
        return
    for name, fig in load_catalog().items():
        if fig.nu != u.nu:
            continue
        key = canonicalize(fig, u.group)
        if key in u.index:
            u.names.setdefault(name, u.index[key])


def _touching(a: frozenset, b: frozenset, nu: int) -> bool:
    for c in a:
        for i in range(nu):
            for d in (-1, 1):
                n = c[:i] + (c[i] + d,) + c[i + 1:]
                if n in b:
                    return True
    return False


def _combine(a: Figure, b: Figure, group, window, max_cells):
    """Unions and intersections of ``a`` with every nearby image of ``b``."""
    nu = a.nu
    steps = [(0,) * nu]
    for i in range(nu):
        for d in (-1, 1):
            steps.append(tuple(d if j == i else 0 for j in range(nu)))
    for img in images(b, group):
        shifts = set()
        for ca in a.cells:
            for cb in img.cells:
                for st in steps:
                    shifts.add(tuple(x - y + s for x, y, s in zip(ca, cb, st)))
        for sh in sorted(shifts):
            moved = frozenset(tuple(x + s for x, s in zip(c, sh)) for c in img.cells)
            common = a.cells & moved
            if not common and not _touching(a.cells, moved, nu):
                continue
            both = a.cells | moved
            if len(both) <= max_cells:
                u = Figure(both)
                if _fits(u, window, group):
                    yield u
            if common:
                yield Figure(common)


def close(seeds: Sequence[Figure], window: Sequence[int], group, max_cells: int = DEFAULT_MAX_CELLS,
          max_rounds: int = DEFAULT_MAX_ROUNDS, max_classes: int = DEFAULT_MAX_CLASSES,
          subfigures: bool = False) -> RegionUniverse:
    """Close ``seeds`` under union and intersection of touching placements.

    Each round combines every pair of known classes in which at least one
    member is new since the previous round. Disjoint placements are only
    united when they touch along a face; overlapping ones yield both their
    union and their intersection. Unions larger than ``max_cells`` cells or
    not fitting ``window`` are dropped. The result is flagged incomplete
    when rounds or the class budget run out before a fixed point.

    With ``subfigures`` every non-empty subset of every class found is added
    afterwards, which keeps the family closed under intersection.
    """
    group = SymmetryGroup.parse(group)
    if group is SymmetryGroup.IDENTITY:
        raise UniverseError("closure needs translations; use subset_universe for labelled figures")
    if not seeds:
        raise UniverseError("closure needs at least one seed")
    window = tuple(int(w) for w in window)
    nu = seeds[0].nu
    if len(window) != nu:
        raise UniverseError(f"window {window} does not match dimension {nu}")
    classes: dict[CanonicalKey, Figure] = {}
    for s in seeds:
        if not _fits(s, window, group):
            raise UniverseError(f"seed {s!r} does not fit window {window}")
        key = canonicalize(s, group)
        classes.setdefault(key, figure_of_key(key))
    cache: dict[frozenset, CanonicalKey] = {}

    def key_of(f: Figure) -> CanonicalKey:
        n = f.normalized().cells
        k = cache.get(n)
        if k is None:
            k = cache[n] = canonicalize(f, group)
        return k

    frontier = sorted(classes, key=lambda k: (len(k), k))
    rounds = 0
    complete = True
    exhausted = False
    while frontier:
        if rounds >= max_rounds:
            complete = False
            break
        rounds += 1
        known = sorted(classes, key=lambda k: (len(k), k))
        front = set(frontier)
        found: dict[CanonicalKey, Figure] = {}
        for i, ka in enumerate(known):
            for kb in known[i:]:
                if ka not in front and kb not in front:
                    continue
                for g in _combine(classes[ka], classes[kb], group, window, max_cells):
                    k = key_of(g)
                    if k not in classes and k not in found:
                        found[k] = figure_of_key(k)
        frontier = sorted(found, key=lambda k: (len(k), k))
        if len(classes) + len(frontier) > max_classes:
            room = max_classes - len(classes)
            frontier = frontier[:max(room, 0)]
            exhausted = True
        for k in frontier:
            classes[k] = found[k]
        log.debug("closure round %d: %d new classes, %d total", rounds, len(frontier), len(classes))
        if exhausted:
            complete = False
            break
    if subfigures and not exhausted:
        extra: dict[CanonicalKey, Figure] = {}
        for k in sorted(classes, key=lambda k: (len(k), k)):
            cells = list(k)
            for r in range(1, len(cells)):
                for sub in combinations(cells, r):
                    sk = key_of(Figure(frozenset(sub)))
                    if sk not in classes and sk not in extra:
                        extra[sk] = figure_of_key(sk)
        new = sorted(extra, key=lambda k: (len(k), k))
        if len(classes) + len(new) > max_classes:
            new = new[:max_classes - len(classes)]
            complete = False
        for k in new:
            classes[k] = extra[k]
    budget = {"window": list(window), "max_cells": max_cells, "max_rounds": max_rounds,
              "max_classes": max_classes, "rounds_used": rounds, "subfigures": subfigures}
    return _sorted_universe(classes, group, nu, window, complete=complete, budget=budget)


def from_figures(figs: Iterable[Figure], window: Sequence[int] | None, group) -> RegionUniverse:
    """Universe whose classes are exactly the given figures (no closure)."""
    group = SymmetryGroup.parse(group)
    figs = list(figs)
    if not figs:
        raise UniverseError("need at least one figure")
    nu = figs[0].nu
    if window is None:
        window = tuple(max(f.extent()[i] for f in figs) for i in range(nu))
    classes = {}
    for f in figs:
        if not _fits(f, window, group):
            raise UniverseError(f"figure {f!r} does not fit window {tuple(window)}")
        k = canonicalize(f, group)
        classes.setdefault(k, f if group is SymmetryGroup.IDENTITY else figure_of_key(k))
    return _sorted_universe(classes, group, nu, window, budget={"window": list(window)})


def chain_universe(n: int) -> RegionUniverse:
    """Segments of length 1..n on the line, quotiented by translation."""
    if n < 1:
        raise UniverseError("chain length must be positive")
    from .figures import box
    u = from_figures([box((k,)) for k in range(1, n + 1)], (n,), SymmetryGroup.TRANSLATIONS)
    for k in range(1, n + 1):
        u.names[f"S{k}"] = u.class_of(box((k,)))
    return u


def box_universe(max_sides: Sequence[int], group="full") -> RegionUniverse:
    """All boxes with sides bounded by ``max_sides``."""
    from itertools import product

    from .figures import box
    figs = [box(a) for a in product(*(range(1, m + 1) for m in max_sides))]
    u = from_figures(figs, tuple(max_sides), group)
    for a in product(*(range(1, m + 1) for m in max_sides)):
        u.names.setdefault("B" + "x".join(map(str, a)), u.class_of(box(a)))
    return u


def subset_universe(fig: Figure) -> RegionUniverse:
    """Every non-empty subset of ``fig`` as its own variable (no symmetry)."""
    cells = fig.sorted_cells()
    if len(cells) > 12:
        raise UniverseError("subset universe limited to 12 cells")
    figs = []
    for r in range(1, len(cells) + 1):
        for sub in combinations(cells, r):
            figs.append(Figure(frozenset(sub)))
    return from_figures(figs, None, SymmetryGroup.IDENTITY)


# --- constraint generation -------------------------------------------------

def _canon_cache(u: RegionUniverse):
    cache: dict = {}
    ident = u.group is SymmetryGroup.IDENTITY

    def idx(cells: tuple) -> int:
        if ident:
            return u.index.get(cells, -1)
        o = cells[0]
        norm = tuple(tuple(x - y for x, y in zip(c, o)) for c in cells)
        r = cache.get(norm)
        if r is None:
            k = canonicalize(Figure(frozenset(norm)), u.group)
            r = cache[norm] = u.index.get(k, -1)
        return r
    return idx


def _lattice_constraints(u: RegionUniverse, kinds) -> list[Constraint]:
    idx = _canon_cache(u)
    out: dict[tuple, Constraint] = {}
    for ui in range(len(u)):
        cells = u.figures[ui].sorted_cells()
        k = len(cells)
        if k < 2:
            continue
        full = (1 << k) - 1
        lut = np.full(1 << k, -1, dtype=np.int64)
        for mask in range(1, full):
            sub = tuple(cells[j] for j in range(k) if mask >> j & 1)
            lut[mask] = idx(sub)
        lut[full] = ui
        members = np.nonzero(lut[:full] >= 0)[0]
        for a in members:
            a = int(a)
            comp = full & ~a
            bs = members[((members & comp) == comp) & (members > a)]
            if len(bs) == 0:
                continue
            inter = bs & a
            for b, i in zip(bs.tolist(), inter.tolist()):
                if i == 0:
                    if "SA" not in kinds:
                        continue
                    kind, ic = "SA", None
                else:
                    if "SSA" not in kinds:
                        continue
                    ic = int(lut[i])
                    if ic < 0:
                        continue
                    kind = "SSA"
                co: dict[int, int] = {}
                for c, s in ((int(lut[a]), 1), (int(lut[b]), 1), (ui, -1), (ic, -1)):
                    if c is not None and c >= 0:
                        co[c] = co.get(c, 0) + s
                vec = tuple(sorted((c, v) for c, v in co.items() if v))
                if not vec or vec in out:
                    continue
                sub_a = tuple(cells[j] for j in range(k) if a >> j & 1)
                sub_b = tuple(cells[j] for j in range(k) if b >> j & 1)
                out[vec] = Constraint(kind, vec, (sub_a, sub_b))
    return list(out.values())


def _abstract_constraints(u: RegionUniverse, kinds) -> list[Constraint]:
    out: dict[tuple, Constraint] = {}
    for p, q, un, i in u.relations:
        kind = "SA" if i is None else "SSA"
        if kind not in kinds:
            continue
        co: dict[int, int] = {}
        for c, s in ((p, 1), (q, 1), (un, -1), (i, -1)):
            if c is not None:
                co[c] = co.get(c, 0) + s
        vec = tuple(sorted((c, v) for c, v in co.items() if v))
        if vec and vec not in out:
            out[vec] = Constraint(kind, vec, (u.keys[p], u.keys[q]))
    return list(out.values())


def generate_constraints(u: RegionUniverse, kinds: Iterable[str] = KINDS) -> list[Constraint]:
    """Axiom instances over ``u``: POS per class, SA per disjoint pair, SSA per overlap.

    Only pairs whose union (and, for SSA, intersection) are classes of the
    universe produce a constraint. Duplicates after the congruence quotient
    and instances that collapse to the zero form are dropped. Order is
    deterministic: POS first, then SA, then SSA, each sorted by coefficients.
    """
    kinds = tuple(k for k in KINDS if k in set(kinds))
    if kinds in u._constraints:
        return u._constraints[kinds]
    rel_kinds = [k for k in kinds if k != "POS"]
    if u.abstract:
        rel = _abstract_constraints(u, rel_kinds)
    else:
        rel = _lattice_constraints(u, rel_kinds)
    pos = [Constraint("POS", ((i, 1),), (u.keys[i],)) for i in range(len(u))] if "POS" in kinds else []
    order = {k: n for n, k in enumerate(KINDS)}
    rel.sort(key=lambda c: (order[c.kind], c.coeffs))
    result = pos + rel
    u._constraints[kinds] = result
    return result


# --- abstract universes ----------------------------------------------------

@dataclass
class AbstractUniverse:
    regions: dict[str, tuple[Fraction, str]]
    relations: list[tuple[str, str, str, str | None]]
    group: str = "abstract"

    @classmethod
    def from_json(cls, obj: dict) -> "AbstractUniverse":
        if "regions" not in obj or not isinstance(obj["regions"], dict):
            raise UniverseError("abstract universe needs a 'regions' object")
        if "relations" not in obj or not isinstance(obj["relations"], list):
            raise UniverseError("abstract universe needs a 'relations' list")
        regions = {}
        for name, entry in obj["regions"].items():
            if not isinstance(entry, dict) or "vol" not in entry:
                raise UniverseError(f"region {name!r} needs a 'vol' field")
            vol = Fraction(str(entry["vol"]))
            if vol <= 0:
                raise UniverseError(f"region {name!r} has non-positive volume")
            regions[name] = (vol, str(entry.get("class", name)))
        rels = []
        for n, r in enumerate(obj["relations"]):
            if not isinstance(r, list) or len(r) != 4:
                raise UniverseError(f"relations[{n}] must be [p, q, union, intersection-or-null]")
            p, q, un, i = r
            if i in ("Empty", "EMPTY", ""):
                i = None
            for name in (p, q, un) + ((i,) if i is not None else ()):
                if name not in regions:
                    raise UniverseError(f"relations[{n}] names unknown region {name!r}")
            lhs = regions[p][0] + regions[q][0]
            rhs = regions[un][0] + (regions[i][0] if i is not None else 0)
            if lhs != rhs:
                raise UniverseError(
                    f"relations[{n}] {r} breaks inclusion-exclusion: {lhs} != {rhs}")
            rels.append((p, q, un, i))
        au = cls(regions, rels, obj.get("group", "abstract"))
        au._check_classes()
        return au

    def _check_classes(self):
        vols: dict[str, Fraction] = {}
        for name, (vol, label) in self.regions.items():
            if vols.setdefault(label, vol) != vol:
                raise UniverseError(f"congruence class {label!r} has regions of different volume")

    def build(self) -> RegionUniverse:
        labels = sorted({lab for _, lab in self.regions.values()},
                        key=lambda lab: (self._label_vol(lab), lab))
        li = {lab: i for i, lab in enumerate(labels)}
        names = {name: li[lab] for name, (_, lab) in self.regions.items()}
        rels = []
        contains: dict[int, set[int]] = {i: set() for i in range(len(labels))}
        for p, q, un, i in self.relations:
            t = (names[p], names[q], names[un], names[i] if i is not None else None)
            rels.append(t)
            contains[t[2]] |= {t[0], t[1]}
            if t[3] is not None:
                contains[t[0]].add(t[3])
                contains[t[1]].add(t[3])
        changed = True
        while changed:
            changed = False
            for a in contains:
                extra = set()
                for b in contains[a]:
                    extra |= contains[b]
                extra -= contains[a]
                if extra:
                    contains[a] |= extra
                    changed = True
        return RegionUniverse(
            group=SymmetryGroup.TRANSLATIONS, keys=labels,
            volumes=[self._label_vol(lab) for lab in labels],
            figures=[None] * len(labels), names=names, relations=rels, contains=contains,
            budget={"source": "abstract"})

    def _label_vol(self, label):
        for vol, lab in self.regions.values():
            if lab == label:
                return vol
        raise KeyError(label)


def load_abstract(src) -> RegionUniverse:
    obj = _read_json(src)
    return AbstractUniverse.from_json(obj).build()


def ring_universe(n: int) -> RegionUniverse:
    """Arcs of length 1..n on a ring of ``n`` sites (the lattice unit circle)."""
    return AbstractUniverse.from_json(ring_json(n)).build()


def ring_json(n: int) -> dict:
    if n < 2:
        raise UniverseError("ring needs at least 2 sites")
    regions = {f"A{k}": {"vol": k, "class": f"A{k}"} for k in range(1, n + 1)}
    rels = set()
    for p in range(1, n):
        for q in range(p, n):
            if p + q <= n:
                rels.add((f"A{p}", f"A{q}", f"A{p + q}", None))
            # second arc starts at s inside the first; overlap p - s, union s + q
            for s in range(1, p):
                if s + q <= p or s + q > n:
                    continue
                rels.add((f"A{p}", f"A{q}", f"A{s + q}", f"A{p - s}"))
            for s in range(1, q):
                if s + p <= q or s + p > n:
                    continue
                rels.add((f"A{q}", f"A{p}", f"A{s + p}", f"A{q - s}"))
    ordered = sorted(rels, key=lambda r: tuple(int(x[1:]) if x else 0 for x in r))
    return {"kind": "ring", "n": n, "regions": regions,
            "relations": [list(r) for r in ordered]}


def _read_json(src) -> dict:
    if isinstance(src, dict):
        return src
    if hasattr(src, "read"):
        return json.load(src)
    path = Path(src)
    if not path.exists():
        name = str(src) if str(src).endswith(".json") else f"{src}.json"
        bundled = resources.files("ssabench.data").joinpath(name)
        if bundled.is_file():
            return json.loads(bundled.read_text())
        raise FileNotFoundError(src)
    return json.loads(path.read_text())


def load_universe(src, **overrides) -> RegionUniverse:
    """Build a universe from any supported JSON description.

    ``src`` may be a path, an open file, a dict, or the name of a bundled
    instance (``hexagon.json``, ``ring_n.json``, ``boxes_2d.json``).
    """
    obj = dict(_read_json(src))
    obj.update({k: v for k, v in overrides.items() if v is not None})
    kind = obj.get("kind")
    if kind is None and "regions" in obj:
        kind = "abstract"
    if kind in ("abstract",):
        return AbstractUniverse.from_json(obj).build()
    if kind == "ring":
        return ring_universe(int(obj["n"]))
    if kind == "chain":
        return chain_universe(int(obj["n"]))
    if kind == "boxes":
        if "group" not in obj:
            raise UniverseError("'group' is required")
        return box_universe(obj["max_sides"], obj["group"])
    if kind in ("closure", "family"):
        if "group" not in obj:
            raise UniverseError("'group' is required")
        figs = [Figure.from_json(f) if isinstance(f, dict) else Figure.of(f) for f in obj.get("seeds", obj.get("figures", []))]
        if kind == "family":
            return from_figures(figs, obj.get("window"), obj["group"])
        return close(figs, obj.get("window", DEFAULT_WINDOW_2D), obj["group"],
                     max_cells=int(obj.get("max_cells", DEFAULT_MAX_CELLS)),
                     max_rounds=int(obj.get("max_rounds", DEFAULT_MAX_ROUNDS)),
                     max_classes=int(obj.get("max_classes", DEFAULT_MAX_CLASSES)),
                     subfigures=bool(obj.get("subfigures", False)))
    raise UniverseError(f"unknown universe kind {kind!r}")


# --- targets ---------------------------------------------------------------

def _target(co: Mapping[int, Fraction], description: str) -> Target:
    vec = tuple(sorted((i, Fraction(c)) for i, c in co.items() if c != 0))
    return Target(vec, description)


def target_mean_monotone(a, b, u: RegionUniverse) -> Target:
    """``|B| S(A) - |A| S(B) >= 0``: mean entropy of A is at least that of B."""
    ia, ib = u.class_of(a), u.class_of(b)
    if not u.is_subclass(ia, ib):
        raise UniverseError(f"{u.name_of(ia)} is not a subfigure of {u.name_of(ib)}")
    co = {ia: u.volumes[ib]}
    co[ib] = co.get(ib, 0) - u.volumes[ia]
    return _target(co, f"S({u.name_of(ia)})/{u.volumes[ia]} >= S({u.name_of(ib)})/{u.volumes[ib]}")


def target_entropy_monotone(a, b, u: RegionUniverse) -> Target:
    """``S(B) - S(A) >= 0`` for A inside B."""
    ia, ib = u.class_of(a), u.class_of(b)
    if not u.is_subclass(ia, ib):
        raise UniverseError(f"{u.name_of(ia)} is not a subfigure of {u.name_of(ib)}")
    co = {ib: Fraction(1)}
    co[ia] = co.get(ia, 0) - 1
    return _target(co, f"S({u.name_of(ia)}) <= S({u.name_of(ib)})")


def target_general(coeffs: Mapping, u: RegionUniverse | None = None, description: str = "") -> Target:
    """Pass coefficients through; keys may be names or figures when ``u`` is given."""
    co: dict[int, Fraction] = {}
    for ref, c in coeffs.items():
        i = u.class_of(ref) if u is not None else int(ref)
        co[i] = co.get(i, Fraction(0)) + Fraction(c)
    return _target(co, description or "general")


def target_average_entropy(fig: Figure, u: RegionUniverse) -> Target:
    """Mean entropy of ``fig`` against the average over its one-cell removals.

    ``(1/n) sum_j S(F - j)/(n-1) - S(F)/n >= 0``.
    """
    n = fig.volume()
    if n < 2:
        raise UniverseError("average-entropy target needs at least 2 cells")
    co: dict[int, Fraction] = {}
    for c in fig.sorted_cells():
        sub = Figure(fig.cells - {c})
        i = u.class_of(sub)
        co[i] = co.get(i, Fraction(0)) + Fraction(1, n * (n - 1))
    top = u.class_of(fig)
    co[top] = co.get(top, Fraction(0)) - Fraction(1, n)
    return _target(co, f"mean entropy of {n}-cell figure <= average over its {n - 1}-cell subfigures")


def nested_pairs(u: RegionUniverse) -> list[tuple[int, int]]:
    """Every (A, B) of distinct classes with A placeable inside B."""
    out = []
    for b in range(len(u)):
        for a in range(len(u)):
            if a != b and u.volumes[a] < u.volumes[b] and u.is_subclass(a, b):
                out.append((a, b))
    return out


def check_constraint_volumes(u: RegionUniverse, cons: Iterable[Constraint]) -> bool:
    """Every SA/SSA form annihilates the volume vector (inclusion-exclusion)."""
    for c in cons:
        if c.kind == "POS":
            continue
        if sum(v * u.volumes[i] for i, v in c.coeffs) != 0:
            return False
    return True
