"""Heuristic search for classical symmetric states that make a target small.

States are probability tables invariant under a site-permutation group. They
are parametrized by orbit masses ``m`` (one per orbit of configurations, on
the probability simplex), so every iterate is symmetric by construction.
Results are "best found" only: a positive minimum says nothing about the
target being true.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .figures import SymmetryGroup
from .models import (
    ClassicalModel,
    ModelError,
    ProbTable,
    Topology,
    default_embedding,
    entropy_table,
    orbit_labels,
)
from .universe import KINDS, RegionUniverse, Target, generate_constraints, nested_pairs, target_mean_monotone

log = logging.getLogger(__name__)

SOUNDNESS_TOL = 1e-8
RECOMPUTE_TOL = 1e-10
FD_STEP = 1e-4
FD_MAX_ORBITS = 64
DEFAULT_RESTARTS = 32
MIN_STEP = 1e-12


class SoundnessError(AssertionError):
    """A state violated an inequality that the prover derived: a pipeline bug."""

    def __init__(self, message: str, dump: dict):
        super().__init__(message)
        self.dump = dump


@dataclass(frozen=True)
class ModelFamily:
    alphabet: int
    topology: Topology
    group: SymmetryGroup = SymmetryGroup.TRANSLATIONS

    def to_json(self) -> dict:
        return {"alphabet": self.alphabet, "topology": self.topology.kind,
                "shape": list(self.topology.shape), "group": self.group.value}


@dataclass
class SearchConfig:
    target: Target
    universe: RegionUniverse
    family: ModelFamily
    iterations: int = 200
    seed: int = 0
    step: float = 0.25
    restarts: int = DEFAULT_RESTARTS
    embedding: dict | None = None
    guards: Sequence[tuple[str, Target]] = ()
    disjunction: tuple[Target, Target] | None = None
    gradient: str = "auto"
    threads: int = 1

    def validate(self) -> None:
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.gradient not in ("auto", "fd", "analytic"):
            raise ValueError(f"unknown gradient mode {self.gradient!r}")
        check_group(self.universe, self.family)


_RANK = {SymmetryGroup.IDENTITY: 0, SymmetryGroup.TRANSLATIONS: 1, SymmetryGroup.FULL: 2}


def check_group(u: RegionUniverse, family: ModelFamily) -> None:
    """States must be invariant under every symmetry the universe quotients by.

    A universe over the full point group identifies, e.g., horizontal and
    vertical dominoes; a merely translation-invariant state can then violate
    inequalities derived in that universe.
    """
    if u.abstract:
        return
    if _RANK[family.group] < _RANK[u.group]:
        raise ModelError(f"universe is quotiented by {u.group.value!r} but states are only "
                         f"{family.group.value!r}-invariant")


@dataclass
class SearchResult:
    min_margin: float
    argmin: dict
    trace: list[float]
    best_restart: int
    disjunction_min: float | None = None
    guard_min: dict = field(default_factory=dict)
    evaluations: int = 0

    def to_json(self) -> dict:
        return {"status": "best_found", "min_margin": self.min_margin,
                "best_restart": self.best_restart, "trace": self.trace,
                "disjunction_min": self.disjunction_min, "guard_min": self.guard_min,
                "evaluations": self.evaluations, "argmin": self.argmin}


class _Evaluator:
    """Margins of the target (and guards) as functions of orbit masses."""

    def __init__(self, cfg: SearchConfig):
        fam = cfg.family
        u = cfg.universe
        emb = cfg.embedding if cfg.embedding is not None else default_embedding(u)
        self.inv, self.sizes = orbit_labels(fam.alphabet, fam.topology, fam.group)
        self.shape = (fam.alphabet,) * fam.topology.sites
        forms = [cfg.target] + [t for _, t in cfg.guards]
        if cfg.disjunction:
            forms += list(cfg.disjunction)
        needed = sorted({i for t in forms for i, _ in t.coeffs})
        self.sites = {}
        for i in needed:
            if i not in emb:
                raise ModelError(f"class {u.name_of(i)} has no embedding")
            self.sites[i] = fam.topology.embed(emb[i])
        self.cfg = cfg
        self.n = fam.topology.sites
        self.count = 0

    def probs(self, m: np.ndarray) -> np.ndarray:
        return (m / self.sizes)[self.inv].reshape(self.shape)

    def marginals(self, p: np.ndarray) -> dict[int, np.ndarray]:
        out = {}
        for i, s in self.sites.items():
            drop = tuple(a for a in range(self.n) if a not in s)
            out[i] = p.sum(axis=drop) if drop else p
        return out

    @staticmethod
    def _h(q: np.ndarray) -> float:
        q = q[q > 0]
        return float(-np.sum(q * np.log(q)))

    def entropies(self, m: np.ndarray) -> dict[int, float]:
        self.count += 1
        return {i: self._h(q) for i, q in self.marginals(self.probs(m)).items()}

    @staticmethod
    def form(t: Target, s: dict[int, float]) -> float:
        return float(sum(float(c) * s[i] for i, c in t.coeffs))

    def margin(self, m: np.ndarray) -> float:
        return self.form(self.cfg.target, self.entropies(m))

    def grad_analytic(self, m: np.ndarray) -> np.ndarray:
        """Gradient in orbit-mass coordinates; the ``-1`` of ``d(-q log q)`` drops on the simplex."""
        p = self.probs(m)
        g = np.zeros(p.shape)
        for i, q in self.marginals(p).items():
            c = sum(float(v) for j, v in self.cfg.target.coeffs if j == i)
            if not c:
                continue
            s = self.sites[i]
            logq = np.log(np.maximum(q, 1e-300))
            expand = tuple(a for a in range(self.n) if a not in s)
            g -= c * np.expand_dims(logq, expand) if expand else c * logq
        return np.bincount(self.inv, weights=g.ravel(), minlength=len(self.sizes)) / self.sizes

    def grad_fd(self, m: np.ndarray) -> np.ndarray:
        g = np.zeros_like(m)
        for o in range(len(m)):
            hi = m.copy()
            hi[o] += FD_STEP
            lo = m.copy()
            lo[o] = max(m[o] - FD_STEP, 0.0)
            width = hi[o] - lo[o]
            g[o] = (self.margin(hi / hi.sum()) - self.margin(lo / lo.sum())) / width
        return g


def _project(m: np.ndarray) -> np.ndarray:
    m = np.clip(m, 0.0, None)
    return m / m.sum()


def _check(ev: _Evaluator, m: np.ndarray, s: dict[int, float], state: dict) -> None:
    cfg = ev.cfg
    for name, t in cfg.guards:
        v = ev.form(t, s)
        state["guards"][name] = min(state["guards"].get(name, math.inf), v)
        if v < -SOUNDNESS_TOL:
            raise SoundnessError(f"derivable target {name} violated by {v:.3e}", _dump(ev, m, s))
    if cfg.disjunction:
        v = max(ev.form(cfg.disjunction[0], s), ev.form(cfg.disjunction[1], s))
        state["disj"] = min(state["disj"], v)
        if v < -SOUNDNESS_TOL:
            raise SoundnessError(f"both disjuncts violated (max margin {v:.3e})", _dump(ev, m, s))


def _dump(ev: _Evaluator, m: np.ndarray, s: dict[int, float]) -> dict:
    return {"state": _state_json(ev, m), "entropies": {ev.cfg.universe.name_of(i): v for i, v in s.items()}}


def _state_json(ev: _Evaluator, m: np.ndarray) -> dict:
    reps = np.full(len(ev.sizes), len(ev.inv), dtype=np.int64)
    np.minimum.at(reps, ev.inv, np.arange(len(ev.inv)))
    return {**ev.cfg.family.to_json(), "orbit_representatives": reps.tolist(),
            "orbit_masses": [float(x) for x in m]}


def _restart(cfg: SearchConfig, r: int, gradient: str) -> tuple[float, np.ndarray, dict, int]:
    ev = _Evaluator(cfg)
    rng = np.random.default_rng([cfg.seed, r])
    k = len(ev.sizes)
    conc = 10.0 ** rng.uniform(-2.0, 0.5)
    m = _project(rng.dirichlet(np.full(k, conc)) + 1e-15)
    state = {"guards": {}, "disj": math.inf}
    s = ev.entropies(m)
    _check(ev, m, s, state)
    cur = ev.form(cfg.target, s)
    eta = cfg.step
    for _ in range(cfg.iterations):
        g = ev.grad_fd(m) if gradient == "fd" else ev.grad_analytic(m)
        d = g - g.mean()
        scale = np.max(np.abs(d))
        if not scale > 0:
            break
        trial = _project(m - eta * d / scale * max(m.max(), 1.0 / k))
        s = ev.entropies(trial)
        _check(ev, trial, s, state)
        val = ev.form(cfg.target, s)
        if val < cur:
            m, cur = trial, val
        else:
            eta /= 2
            if eta < MIN_STEP:
                break
    return cur, m, state, ev.count


def minimize_margin(cfg: SearchConfig) -> SearchResult:
    """Projected descent with random restarts; deterministic for a fixed seed.

    Restarts are independent (restart ``r`` draws from ``default_rng([seed, r])``)
    and may run on threads; the merge keeps the smallest margin, ties going to
    the lowest restart index.
    """
    cfg.validate()
    probe = _Evaluator(cfg)
    gradient = cfg.gradient
    if gradient == "auto":
        gradient = "fd" if len(probe.sizes) <= FD_MAX_ORBITS else "analytic"
    run = lambda r: _restart(cfg, r, gradient)  # noqa: E731
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            outs = list(pool.map(run, range(cfg.restarts)))
    else:
        outs = [run(r) for r in range(cfg.restarts)]
    best = min(range(len(outs)), key=lambda r: (outs[r][0], r))
    val, m, _, _ = outs[best]
    guards: dict[str, float] = {}
    disj = math.inf
    for _, _, st, _ in outs:
        for name, v in st["guards"].items():
            guards[name] = min(guards.get(name, math.inf), v)
        disj = min(disj, st["disj"])
    recomputed = recompute_margin(cfg, m)
    if abs(recomputed - val) > RECOMPUTE_TOL:
        raise AssertionError(f"argmin re-evaluates to {recomputed!r}, search reported {val!r}")
    return SearchResult(
        min_margin=float(val),
        argmin=_state_json(probe, m),
        trace=[float(o[0]) for o in outs],
        best_restart=best,
        disjunction_min=None if cfg.disjunction is None else float(disj),
        guard_min={k: float(v) for k, v in sorted(guards.items())},
        evaluations=sum(o[3] for o in outs),
    )


def faithful_constraints(u: RegionUniverse, topology: Topology, kinds=KINDS,
                         embedding: dict | None = None) -> list[int]:
    """Indices of axiom instances that stay valid for states on ``topology``.

    A lattice instance lives inside the union of its two subfigures; when that
    union embeds injectively, union and intersection survive the wrap and the
    instance holds for every symmetric state. On a small torus, larger unions
    fold onto themselves and their instances must not be used.
    """
    emb = embedding if embedding is not None else default_embedding(u)
    fits = set()
    for i, cells in emb.items():
        try:
            topology.embed(cells)
        except ModelError:
            continue
        fits.add(i)
    out = []
    for j, c in enumerate(generate_constraints(u, kinds)):
        if any(i not in fits for i, _ in c.coeffs):
            continue
        if c.kind != "POS" and not u.abstract:
            try:
                topology.embed(set(c.provenance[0]) | set(c.provenance[1]))
            except ModelError:
                continue
        out.append(j)
    return out


def table_from_masses(family: ModelFamily, masses: Sequence[float]) -> ProbTable:
    inv, sizes = orbit_labels(family.alphabet, family.topology, family.group)
    m = np.asarray(masses, dtype=float)
    if m.shape != sizes.shape:
        raise ModelError(f"expected {len(sizes)} orbit masses, got {m.size}")
    return ProbTable(family.alphabet, family.topology, (m / sizes)[inv] / m.sum())


def recompute_margin(cfg: SearchConfig, masses: Sequence[float]) -> float:
    """Target margin on a state rebuilt independently through the models module."""
    table = table_from_masses(cfg.family, masses)
    model = ClassicalModel(table)
    u = cfg.universe
    emb = cfg.embedding if cfg.embedding is not None else default_embedding(u)
    sub = {i: emb[i] for i, _ in cfg.target.coeffs}
    vals = {i: model.entropy(cells) for i, cells in sub.items()}
    return float(sum(float(c) * vals[i] for i, c in cfg.target.coeffs))


@dataclass
class SweepReport:
    rows: list[dict]
    states: int

    def to_json(self) -> dict:
        return {"status": "best_found", "states": self.states, "pairs": self.rows}


def sweep_pairs(u: RegionUniverse, family: ModelFamily, budget: int, seed: int,
                pairs=None, embedding: dict | None = None) -> SweepReport:
    """Worst observed mean-entropy margin for each nested pair over random states.

    ``budget`` symmetric states are drawn (Dirichlet with a per-state random
    concentration). Rows are sorted by margin, ascending.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    pairs = nested_pairs(u) if pairs is None else pairs
    emb = embedding if embedding is not None else default_embedding(u)
    targets = [target_mean_monotone(a, b, u) for a, b in pairs]
    worst = [math.inf] * len(pairs)
    for s in range(budget):
        rng = np.random.default_rng([seed, s])
        conc = 10.0 ** rng.uniform(-2.0, 0.5)
        table = ProbTable.random(family.alphabet, family.topology, rng, family.group, conc)
        ent = entropy_table(ClassicalModel(table), u, emb)
        for k, t in enumerate(targets):
            worst[k] = min(worst[k], t.evaluate(ent.values) / float(u.volumes[pairs[k][0]] * u.volumes[pairs[k][1]]))
    rows = [{"A": u.name_of(a), "B": u.name_of(b), "min_margin": w}
            for (a, b), w in zip(pairs, worst)]
    rows.sort(key=lambda r: (r["min_margin"], r["A"], r["B"]))
    return SweepReport(rows, budget)


def result_json_text(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)
