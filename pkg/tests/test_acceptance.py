"""Acceptance criteria 1-9, one test each.

Each test prints a single ``criterion N: PASS|FAIL`` line; the lines are
also collected and repeated in the terminal summary (see conftest.py).
"""

import functools
import itertools
import json
import math
import subprocess
import sys
import time

import numpy as np

from oracles import farkas_combination
from ssabench.cli import parse_target
from ssabench.corrent import correlation_entropies, index_identity_error, reconstruct
from ssabench.figures import Figure, SymmetryGroup, canonicalize
from ssabench.models import (
    ClassicalModel,
    MarkovChain1D,
    MarkovModel,
    ProbTable,
    QuantumModel,
    Topology,
    EntropyTable,
    default_embedding,
    entropy_table,
    ghz_state,
    markov_entropy,
    markov_entropy_bruteforce,
    random_ring_state,
)
from ssabench.prover import (
    Derivable,
    UnknownWithinUniverse,
    prove,
    verify_certificate,
    verify_witness,
)
from ssabench.search import ModelFamily, SearchConfig, faithful_constraints, minimize_margin
from ssabench.universe import (
    box_universe,
    chain_universe,
    generate_constraints,
    load_universe,
    nested_pairs,
    ring_universe,
    subset_universe,
    target_average_entropy,
    target_general,
    target_mean_monotone,
)

RESULTS: dict[int, str] = {}


def criterion(n, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except BaseException as e:
                RESULTS[n] = f"criterion {n}: FAIL  {title} ({type(e).__name__}: {str(e)[:120]})"
                print(RESULTS[n])
                raise
            RESULTS[n] = f"criterion {n}: PASS  {title}" + (f" [{detail}]" if detail else "")
            print(RESULTS[n])
        return run
    return wrap


def _derived(u, t, **kw):
    r = prove(u, t, **kw)
    assert isinstance(r, Derivable), t.description
    assert verify_certificate(u, t, r.certificate)
    cons = generate_constraints(u, r.certificate.kinds)
    total = farkas_combination([c.coeffs for c in cons], r.certificate.multipliers)
    assert total == dict(t.coeffs)
    return r


@criterion(1, "mean-entropy steps on 1-D chains")
def test_criterion_1_chain_steps():
    t0 = time.perf_counter()
    for n in range(1, 9):
        u = chain_universe(n + 1)
        _derived(u, target_mean_monotone(f"S{n}", f"S{n + 1}", u))
    u = chain_universe(8)
    for k in range(1, 8):
        _derived(u, target_mean_monotone(f"S{k}", f"S{k + 1}", u))
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    return f"{elapsed:.2f}s"


@criterion(2, "domino/L-tromino step and box induction up to 4x4")
def test_criterion_2_boxes():
    u = load_universe("boxes_2d.json")
    t = target_mean_monotone("domino", "L3", u)
    assert {u.name_of(i): c for i, c in t.coeffs} == {"domino": 3, "L3": -2}
    _derived(u, t)
    counts = []
    for group in ("translations", "full"):
        b = box_universe((4, 4), group)
        pairs = nested_pairs(b)
        for a, c in pairs:
            _derived(b, target_mean_monotone(a, c, b))
        counts.append(len(pairs))
    assert counts == [84, 40]
    return f"{counts[0]} + {counts[1]} box pairs"


@criterion(3, "hexagon chain")
def test_criterion_3_hexagon(hexagon):
    h = hexagon
    targets = [target_mean_monotone("D", "H", h)]
    targets += [target_mean_monotone("H", f"F{k}", h) for k in range(2, 6)]
    targets.append(target_general({"G": 2, "H": -1, "D": -1}, h))
    targets.append(target_mean_monotone("H", "F6", h))
    assert {h.name_of(i): c for i, c in targets[1].coeffs} == {"H": 10, "F2": -6}
    worst = 0.0
    for t in targets:
        t0 = time.perf_counter()
        _derived(h, t)
        dt = time.perf_counter() - t0
        assert dt < 1.0, t.description
        worst = max(worst, dt)
    return f"{len(targets)} targets, slowest {worst * 1000:.1f} ms"


def _window_figures():
    cells = list(itertools.product(range(3), range(3)))
    seen = {}
    for n in range(2, 6):
        for sub in itertools.combinations(cells, n):
            f = Figure(frozenset(sub))
            seen.setdefault(canonicalize(f, "translations"), f)
    return list(seen.values())


@criterion(4, "average entropy from SA+SSA only; lshape/plank open, three derivable")
def test_criterion_4_average_and_three():
    figs = _window_figures()
    assert len(figs) == 271
    for f in figs:
        u = subset_universe(f)
        assert u.group is SymmetryGroup.IDENTITY
        r = _derived(u, target_average_entropy(f, u), kinds=("SA", "SSA"))
        assert r.certificate.kinds == ("SA", "SSA")
    b = load_universe("boxes_2d.json")
    _derived(b, parse_target("three", b))
    for name in ("lshape", "plank"):
        t = parse_target(name, b)
        r = prove(b, t)
        assert isinstance(r, UnknownWithinUniverse), name
        assert verify_witness(b, t, r.witness)
    return f"{len(figs)} figures"


@criterion(5, "GHZ ring entropies and SSA on random 6-qubit ring states")
def test_criterion_5_quantum():
    for n in range(2, 9):
        rho = ghz_state(n)
        for m in range(1, n):
            for start in range(n):
                arc = [(start + j) % n for j in range(m)]
                assert abs(rho.entropy(arc) - math.log(2)) <= 1e-10
        assert abs(rho.entropy(range(n))) <= 1e-10
    u = ring_universe(6)
    cons = [c for c in generate_constraints(u) if c.kind == "SSA"]
    worst = -math.inf
    for seed in range(100):
        rng = np.random.default_rng(seed)
        rho = random_ring_state(6, rng)
        model = QuantumModel(rho)
        table = entropy_table(model, u)
        for c in cons:
            worst = max(worst, -sum(v * table[i] for i, v in c.coeffs))
        # SSA on arbitrary (not only contiguous) site sets
        for _ in range(5):
            lab = rng.integers(0, 4, size=6)
            a, b, c = ([i for i in range(6) if lab[i] == k] for k in range(3))
            if not b:
                continue
            ent = lambda sites: model.entropy([(x,) for x in sites])  # noqa: E731
            worst = max(worst, ent(a + b + c) + ent(b) - ent(a + b) - ent(b + c))
    assert worst <= 1e-9
    return f"max SSA violation {worst:.2e}"


@criterion(6, "Markov closed form, mean decrease and increment bound")
def test_criterion_6_markov():
    rng = np.random.default_rng(2024)
    chains = [MarkovChain1D.symmetric_binary(f) for f in (0.02, 0.1, 0.3, 0.5, 0.9)]
    chains += [MarkovChain1D(rng.dirichlet(np.ones(a), size=a)) for a in (2, 3, 3, 4)]
    for ch in chains:
        s = [markov_entropy(ch, n) for n in range(1, 9)]
        for n in range(1, 9):
            assert abs(s[n - 1] - markov_entropy_bruteforce(ch, n)) <= 1e-10
        for n in range(1, 8):
            assert s[n] / (n + 1) <= s[n - 1] / n + 1e-12
        for n in range(2, 9):
            assert s[n - 1] - s[n - 2] >= ch.conditional_entropy - 1e-9
    return f"{len(chains)} chains"


def _line_sequences():
    out = []
    for f in (0.05, 0.2, 0.5):
        m = MarkovModel(MarkovChain1D.symmetric_binary(f))
        out.append([m.entropy([(x,) for x in range(n)]) for n in range(1, 11)])
    m = MarkovModel(MarkovChain1D(np.random.default_rng(5).dirichlet(np.ones(3), size=3)))
    out.append([m.entropy([(x,) for x in range(n)]) for n in range(1, 11)])
    iid = ClassicalModel(ProbTable.iid([0.2, 0.3, 0.5], Topology.line(8)))
    out.append([iid.entropy([(x,) for x in range(n)]) for n in range(1, 9)])
    for n in range(3, 9):
        g = QuantumModel(ghz_state(n))
        out.append([g.entropy([(x,) for x in range(k)]) for k in range(1, n + 1)])
    for seed in range(5):
        q = QuantumModel(random_ring_state(6, np.random.default_rng(seed)))
        out.append([q.entropy([(x,) for x in range(k)]) for k in range(1, 7)])
        p = ProbTable.random(2, Topology.ring(8), np.random.default_rng(seed), concentration=0.1)
        c = ClassicalModel(p)
        out.append([c.entropy([(x,) for x in range(k)]) for k in range(1, 9)])
    return out


@criterion(7, "correlation-entropy reconstruction and signs")
def test_criterion_7_corrent():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        s = rng.uniform(0, 1, size=10)
        worst = max(worst, float(np.max(np.abs(np.asarray(reconstruct(s)) - s))))
        assert index_identity_error(s) <= 1e-12
    assert worst <= 1e-12
    seqs = _line_sequences()
    for s in seqs:
        assert min(correlation_entropies(s)) >= -1e-9
        assert index_identity_error(s) <= 1e-12
    return f"max reconstruction error {worst:.1e}, {len(seqs)} model sequences"


def _derivable_targets(u, allowed=None, extra=()):
    out = []
    for a, b in nested_pairs(u):
        t = target_mean_monotone(a, b, u)
        if prove(u, t, allowed=allowed).derivable:
            out.append(t)
    for t in extra:
        if prove(u, t, allowed=allowed).derivable:
            out.append(t)
    return out


def _model_tables():
    """(universe, table, allowed instances) for every bundled model family."""
    rng = np.random.default_rng(11)
    chain = chain_universe(8)
    yield chain, [entropy_table(MarkovModel(MarkovChain1D.symmetric_binary(f)), chain)
                  for f in (0.05, 0.2, 0.5)] + [
        entropy_table(MarkovModel(MarkovChain1D(rng.dirichlet(np.ones(3), size=3))), chain),
        entropy_table(ClassicalModel(ProbTable.iid([0.1, 0.9], Topology.line(8))), chain)], None
    for n in (4, 5, 6):
        ring = ring_universe(n)
        tables = [entropy_table(QuantumModel(ghz_state(n)), ring)]
        tables += [entropy_table(QuantumModel(random_ring_state(n, np.random.default_rng(s))), ring)
                   for s in range(3)]
        tables += [entropy_table(ClassicalModel(ProbTable.random(
            2, Topology.ring(n), np.random.default_rng(s), concentration=0.05)), ring) for s in range(3)]
        yield ring, tables, None
    boxes = load_universe("boxes_2d.json")
    for side in (3, 4):
        topo = Topology.torus(side, side)
        allowed = faithful_constraints(boxes, topo)
        cons = generate_constraints(boxes)
        used = sorted({i for j in allowed for i, _ in cons[j].coeffs})
        emb = default_embedding(boxes)
        tables = []
        for s in range(3):
            model = ClassicalModel(ProbTable.random(2, topo, np.random.default_rng(s), SymmetryGroup.FULL,
                                                    concentration=0.02))
            tables.append(EntropyTable({i: model.entropy(emb[i]) for i in used}, topology="torus"))
        yield boxes, tables, allowed


def _search_runs():
    boxes = load_universe("boxes_2d.json")
    fam = ModelFamily(2, Topology.torus(3, 3), SymmetryGroup.FULL)
    allowed = faithful_constraints(boxes, fam.topology)
    guards = [(t.description, t) for t in _derivable_targets(boxes, allowed, [parse_target("three", boxes)])]
    disj = (parse_target("lshape", boxes), parse_target("plank", boxes))
    for name in ("lshape", "plank", "three"):
        for seed in (0, 1):
            yield SearchConfig(parse_target(name, boxes), boxes, fam, iterations=25, restarts=4, seed=seed,
                               guards=guards, disjunction=disj)
    ring = ring_universe(5)
    rfam = ModelFamily(2, Topology.ring(5))
    rguards = [(t.description, t) for t in _derivable_targets(ring)]
    for a, b in (("A1", "A2"), ("A2", "A5")):
        yield SearchConfig(target_mean_monotone(a, b, ring), ring, rfam, iterations=25, restarts=4,
                           seed=3, guards=rguards)


@criterion(8, "cross-validation of derivable targets against models and search")
def test_criterion_8_cross_validation():
    checked = 0
    extra_named = ("boxes", "three")
    for u, tables, allowed in _model_tables():
        extra = [parse_target(n, u) for n in extra_named] if "L3" in u.names else []
        targets = _derivable_targets(u, allowed, extra)
        assert targets
        for tab in tables:
            for t in targets:
                assert t.evaluate(tab.values) >= -1e-8, t.description
                checked += 1
    runs = 0
    for cfg in _search_runs():
        r = minimize_margin(cfg)  # raises SoundnessError on any guard or disjunction violation
        assert all(v >= -1e-8 for v in r.guard_min.values())
        if cfg.disjunction:
            assert r.disjunction_min >= -1e-8
        runs += 1
    return f"{checked} target evaluations, {runs} searches"


CLI_RUNS = [
    ["search", "--universe", "boxes_2d", "--torus", "3", "3", "--target", "lshape", "--disjunction",
     "lshape,plank", "--seed", "9", "--iterations", "10", "--restarts", "4", "--threads", "2"],
    ["verify-models", "--model", "random-ring:5", "--ring", "5", "--seed", "4"],
    ["sweep", "--ring", "5", "--ring-sites", "5", "--seed", "2", "--budget", "6"],
    ["prove", "--universe", "boxes_2d", "--target", "three", "--target", "lshape"],
]


@criterion(9, "byte-identical output across repeated CLI runs")
def test_criterion_9_determinism(tmp_path):
    for k, argv in enumerate(CLI_RUNS):
        outs = []
        for rep in range(3):
            man = tmp_path / f"m{k}_{rep}.json"
            proc = subprocess.run([sys.executable, "-m", "ssabench.cli", "--manifest", str(man), *argv],
                                  capture_output=True, check=False)
            assert proc.returncode in (0, 3), proc.stderr
            outs.append((proc.stdout, man.read_bytes()))
        assert outs[0] == outs[1] == outs[2], argv[0]
        assert json.loads(outs[0][1])["exit_code"] == proc.returncode
    return f"{len(CLI_RUNS)} commands x 3 runs"

