"""Concrete translation-invariant states and their entropy tables.

Entropies are in nats throughout. Classical states are full joint
probability tables over a finite set of sites (line, ring or torus);
quantum states are dense density matrices on qubit rings.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .figures import SymmetryGroup
from .linalg import NotHermitian, jacobi_eigvalsh, partial_trace
from .universe import Constraint, RegionUniverse, generate_constraints, nested_pairs

MAX_TABLE = 2 ** 20
MAX_QUBITS = 12
EIG_CUTOFF = 1e-14


class ModelError(ValueError):
    pass


def entropy_of_probs(q: np.ndarray) -> float:
    q = np.asarray(q, dtype=float).ravel()
    q = q[q > 0]
    return float(-np.sum(q * np.log(q)))


def shannon_entropy(p: "ProbTable", sites: Iterable[int]) -> float:
    """Entropy of the marginal of ``p`` on ``sites`` (0 log 0 = 0)."""
    return p.entropy(sites)


def binary_entropy(p: float) -> float:
    return entropy_of_probs(np.array([p, 1.0 - p]))


# --- classical tables --------------------------------------------------------

@dataclass(frozen=True)
class Topology:
    kind: str  # "line", "ring" or "torus"
    shape: tuple[int, ...]

    @classmethod
    def line(cls, n: int) -> "Topology":
        return cls("line", (n,))

    @classmethod
    def ring(cls, n: int) -> "Topology":
        return cls("ring", (n,))

    @classmethod
    def torus(cls, m1: int, m2: int) -> "Topology":
        return cls("torus", (m1, m2))

    @property
    def sites(self) -> int:
        return math.prod(self.shape)

    @property
    def nu(self) -> int:
        return len(self.shape)

    def site_of(self, cell: Sequence[int]) -> int:
        if len(cell) != self.nu:
            raise ModelError(f"cell {tuple(cell)} has wrong dimension for {self.kind}")
        if self.kind == "line":
            x = cell[0]
            if not 0 <= x < self.shape[0]:
                raise ModelError(f"cell {tuple(cell)} lies outside a line of {self.shape[0]} sites")
            return x
        idx = 0
        for c, m in zip(cell, self.shape):
            idx = idx * m + (c % m)
        return idx

    def embed(self, cells: Iterable[Sequence[int]]) -> tuple[int, ...]:
        cells = list(cells)
        sites = [self.site_of(c) for c in cells]
        if len(set(sites)) != len(sites):
            raise ModelError(f"figure wraps onto itself on {self.kind}{self.shape}")
        return tuple(sorted(sites))

    def permutations(self, group: SymmetryGroup) -> list[tuple[int, ...]]:
        """Site permutations of the symmetry group of this topology."""
        if self.kind == "line" or group is SymmetryGroup.IDENTITY:
            return [tuple(range(self.sites))]
        coords = list(itertools.product(*(range(m) for m in self.shape)))
        if group is SymmetryGroup.FULL:
            if len(set(self.shape)) != 1:
                raise ModelError("full symmetry needs a cubic torus")
            from .figures import orientations
            elems = orientations(self.nu, group)
        else:
            elems = [(tuple(range(self.nu)), (1,) * self.nu)]
        perms = set()
        for perm, signs in elems:
            for shift in coords:
                image = []
                for c in coords:
                    moved = tuple(signs[i] * c[perm[i]] + shift[i] for i in range(self.nu))
                    image.append(self.site_of(moved))
                perms.add(tuple(image))
        return sorted(perms)


@dataclass
class ProbTable:
    alphabet: int
    topology: Topology
    probs: np.ndarray

    def __post_init__(self):
        n = self.topology.sites
        if self.alphabet < 2:
            raise ModelError("alphabet needs at least 2 letters")
        if self.alphabet ** n > MAX_TABLE:
            raise ModelError(f"table of {self.alphabet}^{n} entries exceeds 2^20")
        p = np.asarray(self.probs, dtype=float).reshape((self.alphabet,) * n)
        if np.any(p < 0):
            raise ModelError("probabilities must be non-negative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ModelError(f"probabilities sum to {p.sum()!r}, not 1")
        self.probs = p

    @property
    def sites(self) -> int:
        return self.topology.sites

    def marginal(self, sites: Iterable[int]) -> np.ndarray:
        sites = sorted(set(sites))
        if not sites:
            raise ModelError("marginal over an empty set of sites")
        if sites[0] < 0 or sites[-1] >= self.sites:
            raise ModelError(f"site out of range: {sites}")
        drop = tuple(i for i in range(self.sites) if i not in sites)
        return self.probs.sum(axis=drop) if drop else self.probs

    def entropy(self, sites: Iterable[int]) -> float:
        return entropy_of_probs(self.marginal(sites))

    def symmetrize(self, group: SymmetryGroup = SymmetryGroup.TRANSLATIONS) -> "ProbTable":
        orbits = orbit_labels(self.alphabet, self.topology, group)
        flat = orbit_average(self.probs.ravel(), orbits)
        return ProbTable(self.alphabet, self.topology, flat / flat.sum())

    @classmethod
    def iid(cls, p: Sequence[float], topology: Topology) -> "ProbTable":
        p = np.asarray(p, dtype=float)
        out = np.ones(())
        for _ in range(topology.sites):
            out = np.multiply.outer(out, p)
        return cls(len(p), topology, out)

    @classmethod
    def random(cls, alphabet: int, topology: Topology, rng: np.random.Generator,
               group: SymmetryGroup = SymmetryGroup.TRANSLATIONS, concentration: float = 1.0) -> "ProbTable":
        raw = rng.dirichlet(np.full(alphabet ** topology.sites, concentration))
        return cls(alphabet, topology, raw).symmetrize(group)

    @classmethod
    def from_markov(cls, chain: "MarkovChain1D", n: int, topology: Topology | None = None) -> "ProbTable":
        return cls(chain.alphabet, topology or Topology.line(n), chain.joint(n))


_ORBIT_CACHE: dict = {}


def orbit_labels(alphabet: int, topology: Topology, group: SymmetryGroup) -> tuple[np.ndarray, np.ndarray]:
    """Orbit id of every configuration under the site permutation group."""
    key = (alphabet, topology, group)
    if key in _ORBIT_CACHE:
        return _ORBIT_CACHE[key]
    n = topology.sites
    idx = np.arange(alphabet ** n).reshape((alphabet,) * n)
    label = idx.ravel().copy()
    for perm in topology.permutations(group):
        label = np.minimum(label, np.transpose(idx, perm).ravel())
    _, inv = np.unique(label, return_inverse=True)
    sizes = np.bincount(inv)
    _ORBIT_CACHE[key] = (inv, sizes)
    return inv, sizes


def orbit_average(v: np.ndarray, orbits: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    inv, sizes = orbits
    return (np.bincount(inv, weights=v, minlength=len(sizes)) / sizes)[inv]


# --- Markov chains -------------------------------------------------------------

@dataclass
class MarkovChain1D:
    transition: np.ndarray
    stationary: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.transition, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] < 2:
            raise ModelError("transition must be a square matrix of size >= 2")
        if np.any(t < 0) or np.max(np.abs(t.sum(axis=1) - 1.0)) > 1e-12:
            raise ModelError("transition matrix is not row-stochastic")
        self.transition = t
        if self.stationary is None:
            self.stationary = stationary_distribution(t)
        pi = np.asarray(self.stationary, dtype=float)
        if np.any(pi < 0) or np.max(np.abs(pi @ t - pi)) > 1e-12 or abs(pi.sum() - 1) > 1e-12:
            raise ModelError("supplied distribution is not stationary")
        self.stationary = pi

    @property
    def alphabet(self) -> int:
        return self.transition.shape[0]

    @cached_property
    def conditional_entropy(self) -> float:
        """H(next | previous) under the stationary law; the entropy rate."""
        return float(sum(self.stationary[i] * entropy_of_probs(self.transition[i])
                         for i in range(self.alphabet)))

    def joint(self, n: int) -> np.ndarray:
        """Law of ``n`` consecutive sites, shape ``(a,) * n``."""
        if n < 1:
            raise ModelError("n must be positive")
        p = self.stationary.copy()
        for _ in range(n - 1):
            p = p[..., None] * self.transition
        return p

    @classmethod
    def symmetric_binary(cls, flip: float) -> "MarkovChain1D":
        return cls(np.array([[1 - flip, flip], [flip, 1 - flip]]))


def stationary_distribution(t: np.ndarray) -> np.ndarray:
    a = t.shape[0]
    lhs = np.vstack([t.T - np.eye(a), np.ones(a)])
    rhs = np.zeros(a + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def markov_entropy(chain: MarkovChain1D, n: int) -> float:
    """Entropy of ``n`` consecutive sites: ``H(pi) + (n - 1) H(next | prev)``."""
    if n < 1:
        raise ModelError("n must be positive")
    return entropy_of_probs(chain.stationary) + (n - 1) * chain.conditional_entropy


def markov_entropy_bruteforce(chain: MarkovChain1D, n: int) -> float:
    return entropy_of_probs(chain.joint(n))


# --- quantum states ------------------------------------------------------------

@dataclass
class DensityMatrix:
    matrix: np.ndarray
    sites: int
    d: int = 2

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.d ** self.sites,) * 2:
            raise ModelError(f"shape {m.shape} does not fit {self.sites} sites of dimension {self.d}")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise NotHermitian("density matrix is not Hermitian to 1e-12")
        if abs(np.trace(m) - 1.0) > 1e-12:
            raise ModelError(f"trace is {np.trace(m)!r}, not 1")
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def check_positive(self, tol: float = 1e-10) -> bool:
        return bool(jacobi_eigvalsh(self.matrix).min() >= -tol)

    def reduce(self, keep: Iterable[int]) -> "DensityMatrix":
        keep = sorted(set(keep))
        return DensityMatrix(partial_trace(self.matrix, keep, self.sites, self.d), len(keep), self.d)

    def entropy(self, keep: Iterable[int] | None = None) -> float:
        rho = self if keep is None else self.reduce(keep)
        return von_neumann_entropy(rho)


def von_neumann_entropy(rho: DensityMatrix | np.ndarray) -> float:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    w = jacobi_eigvalsh(m)
    w = w[w > EIG_CUTOFF]
    return float(-np.sum(w * np.log(w)))


def ghz_state(n: int) -> DensityMatrix:
    """Projector onto (|0...0> + |1...1>)/sqrt(2) on ``n`` qubits."""
    if not 2 <= n <= MAX_QUBITS:
        raise ModelError(f"GHZ ring size must be in 2..{MAX_QUBITS}")
    psi = np.zeros(2 ** n, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return DensityMatrix(np.outer(psi, psi.conj()), n)


def cyclic_symmetrize(m: np.ndarray, n: int, d: int = 2) -> np.ndarray:
    """Average of ``m`` over all cyclic shifts of the ``n`` sites."""
    t = m.reshape((d,) * (2 * n))
    acc = np.zeros_like(t)
    for k in range(n):
        perm = [(i + k) % n for i in range(n)]
        acc += np.transpose(t, perm + [n + p for p in perm])
    return (acc / n).reshape(m.shape)


def random_ring_state(n: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random mixed state on an ``n``-qubit ring, averaged over rotations."""
    if not 1 <= n <= MAX_QUBITS:
        raise ModelError(f"ring size must be in 1..{MAX_QUBITS}")
    dim = 2 ** n
    k = rank or dim
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    rho = g @ g.conj().T
    rho = cyclic_symmetrize(rho, n)
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho / np.trace(rho).real, n)


# --- models and entropy tables ---------------------------------------------

class ClassicalModel:
    """Entropy oracle backed by a full probability table."""

    kind = "classical"

    def __init__(self, table: ProbTable):
        self.table = table
        self.topology = table.topology

    def entropy(self, cells) -> float:
        return self.table.entropy(self.topology.embed(cells))


class MarkovModel:
    """Stationary Markov chain on the infinite line; segments use the closed form."""

    kind = "markov"

    def __init__(self, chain: MarkovChain1D, brute_force_limit: int = 12):
        self.chain = chain
        self.topology = Topology("line", (10 ** 9,))
        self.limit = brute_force_limit

    def entropy(self, cells) -> float:
        xs = sorted(c[0] for c in cells)
        if xs == list(range(xs[0], xs[0] + len(xs))):
            return markov_entropy(self.chain, len(xs))
        span = xs[-1] - xs[0] + 1
        if span > self.limit:
            raise ModelError("non-contiguous Markov marginal spans too many sites")
        joint = self.chain.joint(span)
        keep = {x - xs[0] for x in xs}
        drop = tuple(i for i in range(span) if i not in keep)
        return entropy_of_probs(joint.sum(axis=drop) if drop else joint)


class QuantumModel:
    kind = "quantum"

    def __init__(self, rho: DensityMatrix, topology: Topology | None = None):
        self.rho = rho
        self.topology = topology or Topology.ring(rho.sites)
        self._cache: dict = {}

    def entropy(self, cells) -> float:
        sites = self.topology.embed(cells)
        if sites not in self._cache:
            self._cache[sites] = self.rho.entropy(sites)
        return self._cache[sites]


@dataclass
class EntropyTable:
    values: dict[int, float]
    labels: dict[int, str] = field(default_factory=dict)
    topology: str = "line"

    def __getitem__(self, i: int) -> float:
        return self.values[i]

    def to_json(self) -> dict:
        return {self.labels.get(i, str(i)): v for i, v in sorted(self.values.items())}


def _key_label(u: RegionUniverse, i: int) -> str:
    if u.abstract:
        return str(u.keys[i])
    return json.dumps([list(c) for c in u.keys[i]], separators=(",", ":"))


def default_embedding(u: RegionUniverse) -> dict[int, list[tuple[int, ...]]]:
    """Concrete cells for each class: representatives, or arcs ``A<k>`` of a ring."""
    emb = {}
    for i, key in enumerate(u.keys):
        if not u.abstract:
            emb[i] = u.figures[i].sorted_cells()
        elif isinstance(key, str) and key.startswith("A") and key[1:].isdigit():
            emb[i] = [(j,) for j in range(int(key[1:]))]
        else:
            raise ModelError(f"class {key!r} has no lattice embedding")
    return emb


def entropy_table(model, u: RegionUniverse, embedding: dict | None = None) -> EntropyTable:
    emb = embedding if embedding is not None else default_embedding(u)
    missing = [i for i in range(len(u)) if i not in emb]
    if missing:
        raise ModelError(f"embedding misses classes {missing}")
    values = {i: float(model.entropy(emb[i])) for i in range(len(u))}
    labels = {i: _key_label(u, i) for i in range(len(u))}
    return EntropyTable(values, labels, model.topology.kind)


def form_value(coeffs, table: EntropyTable) -> float:
    return float(sum(float(c) * table[i] for i, c in coeffs))


@dataclass
class AxiomReport:
    max_violation: dict[str, float]
    worst: dict[str, int | None]
    counts: dict[str, int]
    tol: float

    @property
    def ok(self) -> bool:
        return all(v <= self.tol for v in self.max_violation.values())

    def to_json(self) -> dict:
        return {"ok": self.ok, "tol": self.tol, "max_violation": self.max_violation,
                "worst_constraint": self.worst, "counts": self.counts}


def check_axioms(table: EntropyTable, u: RegionUniverse, tol: float = 1e-9,
                 constraints: Sequence[Constraint] | None = None) -> AxiomReport:
    """Largest violation ``-(g . S)`` of each axiom kind over the universe."""
    cons = constraints if constraints is not None else generate_constraints(u)
    worst_v = {k: -math.inf for k in ("POS", "SA", "SSA")}
    worst_i: dict[str, int | None] = {k: None for k in worst_v}
    counts = {k: 0 for k in worst_v}
    for j, c in enumerate(cons):
        v = -form_value(c.coeffs, table)
        counts[c.kind] += 1
        if v > worst_v[c.kind]:
            worst_v[c.kind], worst_i[c.kind] = v, j
    worst_v = {k: (v if counts[k] else 0.0) for k, v in worst_v.items()}
    return AxiomReport(worst_v, worst_i, counts, tol)


@dataclass
class MonotonicityReport:
    mean_min_margin: float
    entropy_min_margin: float
    mean_worst: tuple | None
    entropy_worst: tuple | None
    pairs: int

    def to_json(self) -> dict:
        return {"pairs": self.pairs, "mean_min_margin": self.mean_min_margin,
                "entropy_min_margin": self.entropy_min_margin,
                "mean_worst": list(self.mean_worst) if self.mean_worst else None,
                "entropy_worst": list(self.entropy_worst) if self.entropy_worst else None}


def check_monotonicity(table: EntropyTable, u: RegionUniverse, pairs=None) -> MonotonicityReport:
    """Minimum of ``S(A)/|A| - S(B)/|B|`` and of ``S(B) - S(A)`` over nested pairs."""
    pairs = nested_pairs(u) if pairs is None else pairs
    mm, em = math.inf, math.inf
    mw = ew = None
    for a, b in pairs:
        m = table[a] / float(u.volumes[a]) - table[b] / float(u.volumes[b])
        e = table[b] - table[a]
        if m < mm:
            mm, mw = m, (u.name_of(a), u.name_of(b))
        if e < em:
            em, ew = e, (u.name_of(a), u.name_of(b))
    if not pairs:
        mm = em = 0.0
    return MonotonicityReport(mm, em, mw, ew, len(pairs))


def model_from_json(obj: dict, rng: np.random.Generator | None = None):
    """Build a model from a spec such as ``{"kind": "markov", "transition": ...}``."""
    kind = obj.get("kind")
    if kind == "markov":
        if "transition" not in obj:
            raise ModelError("markov model needs 'transition'")
        return MarkovModel(MarkovChain1D(np.array(obj["transition"], dtype=float)))
    if kind == "iid":
        if "p" not in obj or "topology" not in obj:
            raise ModelError("iid model needs 'p' and 'topology'")
        return ClassicalModel(ProbTable.iid(obj["p"], topology_from_json(obj["topology"])))
    if kind == "ghz":
        return QuantumModel(ghz_state(int(obj.get("n", 6))))
    if kind == "random_ring":
        if rng is None:
            raise ModelError("random models need a seed")
        return QuantumModel(random_ring_state(int(obj.get("n", 6)), rng))
    if kind == "random_classical":
        if rng is None:
            raise ModelError("random models need a seed")
        topo = topology_from_json(obj["topology"])
        group = SymmetryGroup.parse(obj.get("group", "translations"))
        return ClassicalModel(ProbTable.random(int(obj.get("alphabet", 2)), topo, rng, group))
    raise ModelError(f"unknown model kind {kind!r}")


def topology_from_json(obj) -> Topology:
    if isinstance(obj, dict):
        kind, shape = obj.get("kind"), obj.get("shape")
    else:
        kind, shape = obj[0], obj[1:]
    if kind not in ("line", "ring", "torus") or not shape:
        raise ModelError(f"bad topology {obj!r}")
    shape = tuple(int(s) for s in (shape if isinstance(shape, (list, tuple)) else [shape]))
    if kind == "torus" and len(shape) != 2:
        raise ModelError("torus needs two side lengths")
    return Topology(kind, shape)
