import random
from collections import deque

import pytest

from valnet.calculi import BELIEF, BUILTINS, POSSIBILITY, PROBABILITY
from valnet.frames import ModelError, Scope, ScopeError, Variable
from valnet.network import (
    DuplicateNameError,
    Hypergraph,
    MarkovTree,
    UnknownNameError,
    ValuationSystem,
    build_hypergraph,
    build_markov_tree,
    validate_tree,
)
from valnet.randomized import random_hypergraph, random_system

from conftest import dress_system


def vars_(names, size=2):
    return {n: Variable(n, tuple(f"{n.lower()}{i}" for i in range(size))) for n in names}


def hg(names, *edges):
    v = vars_(names)
    return Hypergraph(tuple(v.values()), tuple(Scope(tuple(v[n] for n in e)) for e in edges))


def path(tree, a, b):
    """Clusters on the unique tree path from a to b (None if disconnected)."""
    prev = {a: None}
    todo = deque([a])
    while todo:
        x = todo.popleft()
        for y in tree.neighbors(x):
            if y not in prev:
                prev[y] = x
                todo.append(y)
    if b not in prev:
        return None
    out = [b]
    while out[-1] != a:
        out.append(prev[out[-1]])
    return out


def independent_check(tree, hypergraph):
    """Tree-ness, running intersection by explicit paths, and coverage."""
    n = len(tree.clusters)
    assert len(tree.edges) == n - len(tree.components())
    for v in hypergraph.nodes:
        holding = tree.clusters_containing(v.name)
        assert holding, v
        for i in holding:
            for j in holding:
                p = path(tree, i, j)
                if p is not None:
                    assert all(v in tree.clusters[k] for k in p)
                else:
                    pytest.fail(f"{v.name} appears in two disconnected trees")
    for e in hypergraph.hyperedges:
        assert e.issubset(tree.clusters[tree.assignment[e]])


# --- the valuation system ------------------------------------------------------------


def test_namespace_is_shared():
    s = ValuationSystem()
    s.add_variable("A", "xy")
    with pytest.raises(DuplicateNameError):
        s.add_variable("A", "xy")
    s.add_relation("r", ["A"])
    with pytest.raises(DuplicateNameError):
        s.add_variable("r", "xy")
    with pytest.raises(UnknownNameError):
        s.add_relation("q", ["A", "Z"])
    with pytest.raises(ModelError):
        s.add_relation("q", ["A", "A"])


def test_relation_scope_is_canonical_but_order_remembered():
    s = dress_system()
    assert s.scope_of("washing").names == ("Dress", "Philco")
    assert s.declared_order("washing") == ("Philco", "Dress")


def test_attach_checks_kind_and_scope():
    s = dress_system()
    with pytest.raises(ScopeError):
        s.attach("washing", PROBABILITY, PROBABILITY.default(s.scope_of("coherence")))
    with pytest.raises(ValueError):
        s.attach("washing", PROBABILITY, POSSIBILITY.default(s.scope_of("washing")))


def test_observe_is_idempotent_and_retractable():
    s = dress_system()
    s.observe("Philco", "out")
    once = build_hypergraph(s, PROBABILITY)
    s.observe("Philco", "out")
    assert build_hypergraph(s, PROBABILITY) == once
    with pytest.raises(ValueError):
        s.observe("Philco", "broken")
    s.retract("Philco")
    assert s.observations == {}
    assert Scope.of(s.variable("Philco")) not in build_hypergraph(s, PROBABILITY).hyperedges


def test_reset_keeps_structure():
    s = dress_system()
    s.attach("washing", PROBABILITY, PROBABILITY.default(s.scope_of("washing")))
    s.observe("Speech", "uttered")
    s.reset()
    assert s.attached == {} and s.observations == {}
    assert set(s.relations) == {"washing", "coherence"}


# --- hypergraph and tree -------------------------------------------------------------


def test_dress_hypergraph():
    s = dress_system()
    s.observe("Philco", "out")
    h = build_hypergraph(s, PROBABILITY)
    assert [e.names for e in h.hyperedges] == [("Dress", "Philco"), ("Dress", "Speech"), ("Philco",)]
    tree = build_markov_tree(h)
    assert [c.names for c in tree.clusters] == [("Dress", "Philco"), ("Dress", "Speech")]
    assert tree.separator(0, 1).names == ("Dress",)
    assert validate_tree(tree, h).ok


def test_chain_becomes_a_path():
    h = hg("ABCD", "AB", "BC", "CD")
    tree = build_markov_tree(h)
    assert [c.names for c in tree.clusters] == [("A", "B"), ("B", "C"), ("C", "D")]
    assert tree.edges == ((0, 1), (1, 2))
    assert [tree.separator(*e).names for e in tree.edges] == [("B",), ("C",)]


def test_cycle_is_triangulated():
    h = hg("ABCD", "AB", "BC", "CD", "AD")
    tree = build_markov_tree(h)
    assert all(len(c) == 3 for c in tree.clusters) and len(tree.clusters) == 2
    independent_check(tree, h)
    assert validate_tree(tree, h).ok


def test_disconnected_parts_make_a_forest():
    h = hg("ABCE", "AB", "C")
    tree = build_markov_tree(h)
    assert len(tree.components()) == 3  # {A,B}, {C}, and the lone E
    assert validate_tree(tree, h).ok


def test_validate_catches_running_intersection_failure():
    v = vars_("ABC")
    clusters = (Scope.of(v["A"], v["B"]), Scope.of(v["B"], v["C"]), Scope.of(v["A"], v["C"]))
    bad = MarkovTree(clusters, ((0, 1), (1, 2)))
    report = validate_tree(bad)
    assert not report.ok
    assert any("running intersection fails for A" in p for p in report.violations)


def test_validate_catches_missing_coverage_and_cycles():
    h = hg("ABC", "AB", "BC", "AC")
    v = {x.name: x for x in h.nodes}
    clusters = (Scope.of(v["A"], v["B"]), Scope.of(v["B"], v["C"]))
    report = validate_tree(MarkovTree(clusters, ((0, 1),)), h)
    assert any("not covered" in p for p in report.violations), report.violations
    cyclic = MarkovTree(clusters, ((0, 1), (1, 0)))
    assert any("cycle" in p for p in validate_tree(cyclic).violations)


def test_validate_catches_uncovered_variable():
    h = hg("AB", "A")
    v = {x.name: x for x in h.nodes}
    report = validate_tree(MarkovTree((Scope.of(v["A"]),), ()), h)
    assert any("B is in no cluster" in p for p in report.violations)


def test_random_hypergraphs_give_valid_trees():
    rng = random.Random(21)
    for _ in range(200):
        h = random_hypergraph(rng)
        tree = build_markov_tree(h)
        assert validate_tree(tree, h).ok
        independent_check(tree, h)
        # no cluster is contained in another
        for i, a in enumerate(tree.clusters):
            for j, b in enumerate(tree.clusters):
                assert i == j or not a.issubset(b)


def test_construction_is_deterministic():
    rng = random.Random(5)
    for _ in range(30):
        h = random_hypergraph(rng)
        shuffled = Hypergraph(tuple(reversed(h.nodes)), tuple(reversed(h.hyperedges)))
        assert build_markov_tree(h) == build_markov_tree(shuffled)


def test_structure_shared_across_calculi():
    """Without per-calculus evidence on variables, every calculus sees one hypergraph."""
    s = dress_system()
    s.observe("Philco", "out")
    graphs = {c.name: build_hypergraph(s, c) for c in BUILTINS}
    assert len(set(graphs.values())) == 1


def test_variable_valuation_only_touches_its_calculus():
    s = dress_system()
    s.attach("Speech", BELIEF, BELIEF.default(s.scope_of("Speech")))
    assert Scope.of(s.variable("Speech")) in build_hypergraph(s, BELIEF).hyperedges
    assert Scope.of(s.variable("Speech")) not in build_hypergraph(s, PROBABILITY).hyperedges


def test_random_system_hyperedge_valuations_cover_edges():
    rng = random.Random(17)
    for _ in range(50):
        s = random_system(rng, BUILTINS)
        for c in BUILTINS:
            vals = s.hyperedge_valuations(c)
            assert set(vals) == set(build_hypergraph(s, c).hyperedges)
            assert all(c.accepts(v) and v.scope == e for e, v in vals.items())
