import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ghz_marginal_entropy, h, markov_segment_entropy
from ssabench.figures import SymmetryGroup
from ssabench.linalg import NotHermitian
from ssabench.models import (
    ClassicalModel,
    DensityMatrix,
    MarkovChain1D,
    MarkovModel,
    ModelError,
    ProbTable,
    QuantumModel,
    Topology,
    binary_entropy,
    check_axioms,
    check_monotonicity,
    entropy_table,
    ghz_state,
    markov_entropy,
    markov_entropy_bruteforce,
    model_from_json,
    random_ring_state,
    shannon_entropy,
    topology_from_json,
    von_neumann_entropy,
)
from ssabench.universe import chain_universe, generate_constraints

# S(3) of the symmetric binary chain with flip 0.1, frozen from the word-enumeration oracle
MARKOV_S3 = 1.343313127342842


def test_shannon_examples():
    p = ProbTable.iid([0.5, 0.5], Topology.line(3))
    assert math.isclose(shannon_entropy(p, [0, 2]), 2 * math.log(2))
    assert binary_entropy(0.0) == 0.0
    assert math.isclose(binary_entropy(0.25), h([0.25, 0.75]))


def test_deterministic_table_has_zero_entropy():
    probs = np.zeros(8)
    probs[5] = 1.0
    p = ProbTable(2, Topology.line(3), probs)
    assert p.entropy([0, 1, 2]) == 0.0


def test_prob_table_validation():
    with pytest.raises(ModelError):
        ProbTable(2, Topology.line(2), np.array([0.5, 0.5, 0.5, -0.5]))
    with pytest.raises(ModelError):
        ProbTable(2, Topology.line(2), np.full(4, 0.3))
    with pytest.raises(ModelError):
        ProbTable(2, Topology.line(21), np.zeros(1))
    with pytest.raises(ModelError):
        ProbTable.iid([0.5, 0.5], Topology.line(2)).marginal([])


def test_markov_frozen_value():
    chain = MarkovChain1D.symmetric_binary(0.1)
    assert math.isclose(markov_entropy(chain, 3), MARKOV_S3, abs_tol=1e-12)
    assert math.isclose(markov_segment_entropy(0.1, 3), MARKOV_S3, abs_tol=1e-12)


@settings(max_examples=40, deadline=None)
@given(flip=st.floats(0.01, 0.99), n=st.integers(1, 9))
def test_markov_closed_form_matches_enumeration(flip, n):
    chain = MarkovChain1D.symmetric_binary(flip)
    assert math.isclose(markov_entropy(chain, n), markov_segment_entropy(flip, n), abs_tol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), a=st.integers(2, 4), n=st.integers(1, 6))
def test_markov_closed_form_matches_joint_law(seed, a, n):
    t = np.random.default_rng(seed).dirichlet(np.ones(a), size=a)
    chain = MarkovChain1D(t)
    assert math.isclose(markov_entropy(chain, n), markov_entropy_bruteforce(chain, n), abs_tol=1e-10)


def test_markov_validation():
    with pytest.raises(ModelError):
        MarkovChain1D(np.array([[0.5, 0.6], [0.5, 0.5]]))
    with pytest.raises(ModelError):
        MarkovChain1D(np.array([[0.9, 0.1], [0.2, 0.8]]), stationary=np.array([0.5, 0.5]))


def test_markov_gap_marginal():
    m = MarkovModel(MarkovChain1D.symmetric_binary(0.0))
    # frozen chain: sites agree, so any set of sites carries one bit
    assert math.isclose(m.entropy([(0,), (3,)]), math.log(2))


@pytest.mark.parametrize("n", range(2, 9))
def test_ghz_marginals(n):
    rho = ghz_state(n)
    for m in range(1, n + 1):
        assert abs(rho.entropy(range(m)) - ghz_marginal_entropy(n, m)) < 1e-10


def test_density_matrix_validation():
    with pytest.raises(ModelError):
        DensityMatrix(np.eye(4) / 2, 2)
    with pytest.raises(NotHermitian):
        DensityMatrix(np.array([[0.5, 1.0], [0.0, 0.5]]), 1)
    with pytest.raises(ModelError):
        DensityMatrix(np.eye(3) / 3, 2)
    assert not DensityMatrix(np.diag([1.5, -0.5]), 1).check_positive()


def test_maximally_mixed_entropy():
    assert math.isclose(von_neumann_entropy(np.eye(8) / 8), 3 * math.log(2))


def test_random_ring_state_is_rotation_invariant():
    rho = random_ring_state(5, np.random.default_rng(1))
    assert rho.check_positive()
    base = rho.entropy([0, 1])
    for k in range(5):
        assert abs(rho.entropy([k, (k + 1) % 5]) - base) < 1e-10


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), k=st.integers(0, 3))
def test_symmetrized_table_is_translation_invariant(seed, k):
    topo = Topology.ring(4)
    p = ProbTable.random(2, topo, np.random.default_rng(seed))
    assert np.allclose(np.transpose(p.probs, [(i + k) % 4 for i in range(4)]), p.probs)


def test_full_group_needs_cubic_torus():
    with pytest.raises(ModelError):
        Topology.torus(2, 3).permutations(SymmetryGroup.FULL)
    assert len(Topology.torus(2, 2).permutations(SymmetryGroup.FULL)) > 1


def test_embedding_wraps_on_ring():
    assert Topology.ring(4).embed([(3,), (4,)]) == (0, 3)
    with pytest.raises(ModelError):
        Topology.ring(3).embed([(0,), (3,)])
    with pytest.raises(ModelError):
        Topology.line(3).embed([(3,)])


def test_iid_table_satisfies_axioms_with_equality_for_sa():
    u = chain_universe(4)
    t = entropy_table(ClassicalModel(ProbTable.iid([0.3, 0.7], Topology.line(4))), u)
    rep = check_axioms(t, u)
    assert rep.ok
    assert abs(rep.max_violation["SA"]) < 1e-12
    for k in range(1, 5):
        assert math.isclose(t[u.class_of(f"S{k}")], k * h([0.3, 0.7]))


def test_corrupted_table_is_caught():
    u = chain_universe(4)
    t = entropy_table(MarkovModel(MarkovChain1D.symmetric_binary(0.2)), u)
    t.values[u.class_of("S2")] += 0.5
    rep = check_axioms(t, u, constraints=generate_constraints(u))
    assert not rep.ok
    # 2 S(1) - S(2) had slack ln 2 - H(0.2) before the shift
    assert math.isclose(rep.max_violation["SA"], 0.5 - (math.log(2) - h([0.2, 0.8])), abs_tol=1e-12)


def test_markov_monotonicity_on_chain():
    u = chain_universe(6)
    t = entropy_table(MarkovModel(MarkovChain1D.symmetric_binary(0.15)), u)
    mono = check_monotonicity(t, u)
    assert mono.mean_min_margin >= -1e-12
    assert mono.entropy_min_margin >= -1e-12
    assert mono.pairs == 15


def test_ghz_ring_table():
    from ssabench.universe import ring_universe
    u = ring_universe(4)
    t = entropy_table(QuantumModel(ghz_state(4)), u)
    assert abs(t[u.class_of("A4")]) < 1e-10
    assert abs(t[u.class_of("A2")] - math.log(2)) < 1e-10
    assert check_axioms(t, u).ok


def test_model_from_json():
    assert isinstance(model_from_json({"kind": "markov", "transition": [[0.9, 0.1], [0.1, 0.9]]}), MarkovModel)
    assert model_from_json({"kind": "iid", "p": [0.5, 0.5], "topology": ["ring", 3]}).topology.kind == "ring"
    with pytest.raises(ModelError, match="seed"):
        model_from_json({"kind": "random_ring", "n": 3})
    with pytest.raises(ModelError, match="transition"):
        model_from_json({"kind": "markov"})
    with pytest.raises(ModelError):
        model_from_json({"kind": "laser"})
    with pytest.raises(ModelError):
        topology_from_json({"kind": "torus", "shape": [3]})
