import random
from collections import defaultdict

import numpy as np
import pytest

from valnet.calculi import (
    BELIEF,
    BOOLEAN,
    BUILTINS,
    POSSIBILITY,
    PROBABILITY,
    DegenerateValuationError,
    KindMismatchError,
    MassValuation,
    PointValuation,
    combine_mass,
    combine_point,
    default_valuation,
    deviation,
    marginalize_mass,
    marginalize_point,
    normalize,
    readout,
)
from valnet.frames import (
    ConfigSet,
    Configuration,
    Scope,
    ScopeError,
    Variable,
    enumerate_configurations,
    project_config,
)
from valnet.randomized import random_subscope, random_variables

DRESS = Variable("Dress", ("B", "W", "P"))
PHILCO = Variable("Philco", ("ok", "out"))
SPEECH = Variable("Speech", ("uttered", "unuttered"))
WASH = Scope.of(DRESS, PHILCO)
COH = Scope.of(DRESS, SPEECH)
D = Scope.of(DRESS)


# --- brute-force oracles -------------------------------------------------------------


def brute_combine_point(op, G, H):
    u = G.scope | H.scope
    out = np.empty(u.shape, dtype=G.table.dtype)
    for x in enumerate_configurations(u):
        out[x.values] = op(G[project_config(x, G.scope)], H[project_config(x, H.scope)])
    return out


def brute_marginalize_point(reduce, G, h):
    groups = defaultdict(list)
    for x in enumerate_configurations(G.scope):
        groups[project_config(x, h).values].append(G[x])
    out = np.empty(h.shape, dtype=G.table.dtype)
    for key, vals in groups.items():
        out[key] = reduce(vals)
    return out


def brute_combine_mass(G, H):
    """Dempster's unnormalized rule on explicit sets of configurations."""
    u = G.scope | H.scope
    W = enumerate_configurations(u)

    def cylinder(a, scope):
        members = a.members
        return frozenset(y for y in W if project_config(y, scope) in members)

    out = defaultdict(float)
    # existing conflict is mass on the empty set, which absorbs under intersection
    conflict = G.conflict * H.total + G.focal_total * H.conflict
    for a, ma in G.focal_sets().items():
        for b, mb in H.focal_sets().items():
            c = cylinder(a, G.scope) & cylinder(b, H.scope)
            if c:
                out[c] += ma * mb
            else:
                conflict += ma * mb
    return out, conflict


def as_sets(m: MassValuation):
    return {s.members: v for s, v in m.focal_sets().items()}


# --- combination ---------------------------------------------------------------------


def table(scope, kind, rows):
    """``rows`` are written (X, Dress) as in the printed tables; stored (Dress, X)."""
    return PointValuation(scope, kind, np.array(rows).T)


def test_combine_probability_entry():
    G = table(WASH, "probability", [[1 / 6] * 3, [0.2, 0.1, 0.2]])
    H = table(COH, "probability", [[0.025, 0.025, 0.45], [1 / 6] * 3])
    GH = combine_point(PROBABILITY, G, H)
    assert GH.scope.names == ("Dress", "Philco", "Speech")
    # 0.2 * 0.025, from the two printed tables
    assert GH[{"Dress": "B", "Philco": "out", "Speech": "uttered"}] == pytest.approx(0.005, abs=1e-12)
    np.testing.assert_allclose(GH.table, brute_combine_point(lambda a, b: a * b, G, H), atol=1e-15)


def test_combine_possibility_min():
    G = table(WASH, "possibility", [[1, 1, 1], [1, 0.2, 1]])
    H = table(COH, "possibility", [[0.1, 0.1, 1], [1, 1, 1]])
    GH = combine_point(POSSIBILITY, G, H)
    assert GH[{"Dress": "W", "Philco": "out", "Speech": "uttered"}] == 0.1
    np.testing.assert_array_equal(GH.table, brute_combine_point(min, G, H))


def test_combine_boolean_and():
    G = table(WASH, "boolean", [[True] * 3, [True, False, True]])
    H = table(COH, "boolean", [[False, False, True], [True] * 3])
    GH = combine_point(BOOLEAN, G, H)
    assert not GH[{"Dress": "W", "Philco": "out", "Speech": "uttered"}]
    assert GH[{"Dress": "P", "Philco": "out", "Speech": "uttered"}]
    np.testing.assert_array_equal(GH.table, brute_combine_point(lambda a, b: a and b, G, H))


def test_combine_rejects_mixed_kinds():
    G = table(WASH, "possibility", [[1, 1, 1], [1, 0.2, 1]])
    H = table(COH, "probability", [[0.1, 0.1, 1], [1, 1, 1]])
    with pytest.raises(KindMismatchError):
        combine_point(POSSIBILITY, G, H)
    with pytest.raises(KindMismatchError):
        combine_mass(MassValuation.vacuous(D), G)


@pytest.mark.parametrize("calc,op,reduce", [
    (PROBABILITY, lambda a, b: a * b, sum),
    (POSSIBILITY, min, max),
    (BOOLEAN, lambda a, b: a and b, any),
])
def test_point_operators_match_brute_force(calc, op, reduce):
    rng = random.Random(7)
    for _ in range(60):
        vs = random_variables(rng, 4)
        g, h = random_subscope(rng, vs), random_subscope(rng, vs)
        G, H = calc.sample(g, rng), calc.sample(h, rng)
        got = calc.combine(G, H)
        assert deviation(got, PointValuation(got.scope, calc.name, brute_combine_point(op, G, H))) <= 1e-12
        k = Scope(tuple(v for v in g if rng.random() < 0.5))
        m = calc.marginalize(G, k)
        assert deviation(m, PointValuation(k, calc.name, brute_marginalize_point(reduce, G, k))) <= 1e-12


# --- marginalization -----------------------------------------------------------------


def test_marginalize_probability_row():
    G = table(WASH, "probability", [[1 / 6] * 3, [0.2, 0.1, 0.2]])
    m = marginalize_point(PROBABILITY, G, Scope.of(PHILCO))
    assert m[("out",)] == pytest.approx(0.5, abs=1e-12)


def test_marginalize_possibility_row():
    G = table(WASH, "possibility", [[1, 1, 1], [1, 0.2, 1]])
    assert marginalize_point(POSSIBILITY, G, Scope.of(PHILCO))[("out",)] == 1.0


@pytest.mark.parametrize("calc", BUILTINS)
def test_marginalize_to_own_scope_is_identity(calc):
    G = calc.sample(WASH, random.Random(1))
    assert deviation(calc.marginalize(G, WASH), G) == 0


def test_marginalize_rejects_bad_scope():
    G = table(WASH, "probability", [[1 / 6] * 3, [0.2, 0.1, 0.2]])
    with pytest.raises(ScopeError):
        marginalize_point(PROBABILITY, G, Scope.of(SPEECH))
    with pytest.raises(ScopeError):
        marginalize_mass(MassValuation.vacuous(WASH), COH)


# --- belief functions ----------------------------------------------------------------


def bpa(scope, masses, complete=True):
    return MassValuation.from_sets(scope, masses, complete=complete)


def test_combine_mass_dress_state2():
    G = bpa(D, {("B", "P"): 0.8})
    H = bpa(D, {("P",): 0.9})
    expected, conflict = brute_combine_mass(G, H)
    # frozen from the brute-force enumeration of the four focal pairs
    P, BP, ALL = (frozenset(Configuration.from_labels(D, (x,)) for x in s) for s in ("P", "BP", "BWP"))
    assert set(expected) == {P, BP, ALL}
    assert expected[P] == pytest.approx(0.9) and expected[BP] == pytest.approx(0.08)
    assert expected[ALL] == pytest.approx(0.02) and conflict == 0
    got = combine_mass(G, H)
    assert got[("P",)] == pytest.approx(0.9, abs=1e-12)
    assert got[("B", "P")] == pytest.approx(0.08, abs=1e-12)
    assert got[("B", "W", "P")] == pytest.approx(0.02, abs=1e-12)
    assert got.conflict == 0


def test_combine_mass_vacuous_identity():
    H = bpa(WASH, {(("B", "ok"), ("W", "out")): 0.3, (("P", "ok"),): 0.5})
    got = combine_mass(MassValuation.vacuous(WASH), H)
    assert deviation(got, H) == 0
    got = combine_mass(MassValuation.vacuous(D), H)
    assert deviation(got, H) == 0


def test_combine_mass_total_conflict():
    got = combine_mass(bpa(D, {("B",): 1.0}), bpa(D, {("W",): 1.0}))
    assert got.focal == {} and got.conflict == 1.0
    with pytest.raises(DegenerateValuationError):
        normalize(BELIEF, got)


def test_combine_mass_matches_brute_force():
    rng = random.Random(11)
    for _ in range(80):
        vs = random_variables(rng, 3)
        g, h = random_subscope(rng, vs), random_subscope(rng, vs)
        G, H = BELIEF.sample(g, rng), BELIEF.sample(h, rng)
        expected, conflict = brute_combine_mass(G, H)
        got = combine_mass(G, H)
        assert got.conflict == pytest.approx(conflict, abs=1e-12)
        mine = as_sets(got)
        assert set(mine) == set(expected)
        for k in expected:
            assert mine[k] == pytest.approx(expected[k], abs=1e-12)
        assert got.total == pytest.approx(G.total * H.total, abs=1e-12)


def test_marginalize_mass_washing_is_vacuous_on_dress():
    G = bpa(WASH, {(("B", "ok"), ("W", "ok"), ("P", "ok"), ("B", "out"), ("P", "out")): 0.8})
    m = marginalize_mass(G, D)
    assert m.focal_sets() == {ConfigSet.full(D): pytest.approx(1.0)}


def test_marginalize_mass_preserves_totals():
    rng = random.Random(3)
    for _ in range(100):
        vs = random_variables(rng, 3)
        g = random_subscope(rng, vs)
        G = BELIEF.sample(g, rng)
        h = Scope(tuple(v for v in g if rng.random() < 0.5))
        m = marginalize_mass(G, h)
        assert m.focal_total == pytest.approx(G.focal_total, abs=1e-12)
        assert m.conflict == G.conflict


def test_mass_invariants():
    with pytest.raises(ValueError):
        MassValuation(D, {0: 0.5})
    with pytest.raises(ValueError):
        MassValuation(D, {1: -0.1})
    with pytest.raises(ValueError):
        bpa(D, {("B",): 0.7, ("W",): 0.6})


# --- normalization -------------------------------------------------------------------


def test_normalize_probability_state2():
    v = PointValuation(D, "probability", [0.005, 0.0025, 0.09])
    n = normalize(PROBABILITY, v)
    assert [round(x, 3) for x in n.table] == [0.051, 0.026, 0.923]


def test_normalize_possibility_already_normal():
    v = PointValuation(D, "possibility", [0.1, 0.1, 1])
    assert deviation(normalize(POSSIBILITY, v), v) == 0
    half = PointValuation(D, "possibility", [0.05, 0.05, 0.5])
    assert deviation(normalize(POSSIBILITY, half), v) <= 1e-15


def test_normalize_boolean_identity():
    v = PointValuation(D, "boolean", [False, False, False])
    assert normalize(BOOLEAN, v) is v


def test_normalize_mass_drops_conflict():
    v = MassValuation(D, {0b100: 0.3, 0b111: 0.1}, conflict=0.6)
    n = normalize(BELIEF, v)
    assert n.conflict == 0 and n.focal_total == pytest.approx(1.0)
    assert n[("P",)] == pytest.approx(0.75)


@pytest.mark.parametrize("calc,v", [
    (PROBABILITY, PointValuation(D, "probability", [0, 0, 0])),
    (POSSIBILITY, PointValuation(D, "possibility", [0, 0, 0])),
    (BELIEF, MassValuation(D, {}, conflict=1.0)),
])
def test_normalize_degenerate(calc, v):
    with pytest.raises(DegenerateValuationError):
        normalize(calc, v)


# --- defaults and readouts -----------------------------------------------------------


def test_defaults():
    p = default_valuation(PROBABILITY, WASH)
    assert np.allclose(p.table, 1 / 6)
    assert default_valuation(BELIEF, WASH).focal_sets() == {ConfigSet.full(WASH): 1.0}
    assert np.all(default_valuation(POSSIBILITY, WASH, "variable").table == 1)
    assert np.all(default_valuation(BOOLEAN, WASH, "relation").table)


def test_readout_belief_state2():
    m = bpa(D, {("P",): 0.9, ("B", "P"): 0.08})
    r = readout(BELIEF, m)
    assert r.columns == ("bel", "pl")
    assert r["P"] == pytest.approx((0.9, 1.0))
    assert r["W"][1] == pytest.approx(0.02)
    assert r["B"][1] == pytest.approx(0.1)
    assert all(bel <= pl for _, (bel, pl) in r.rows)


def test_readout_belief_bounds_on_random_bpas():
    rng = random.Random(5)
    for _ in range(100):
        m = normalize(BELIEF, BELIEF.sample(D, rng))
        r = readout(BELIEF, m)
        for _, (bel, pl) in r.rows:
            assert bel <= pl + 1e-12


def test_readout_possibility_necessity():
    r = readout(POSSIBILITY, PointValuation(D, "possibility", [1, 0.2, 1]))
    assert r["W"] == (0.0, 0.2)
    r = readout(POSSIBILITY, PointValuation(D, "possibility", [0.1, 0.1, 1]))
    assert r["P"] == pytest.approx((0.9, 1.0))


def test_readout_probability_verbatim():
    r = readout(PROBABILITY, PointValuation(D, "probability", [0.4, 0.2, 0.4]))
    assert [row for _, row in r.rows] == [(0.4,), (0.2,), (0.4,)]


def test_readout_needs_single_variable():
    with pytest.raises(ScopeError):
        readout(PROBABILITY, default_valuation(PROBABILITY, WASH))


# --- algebraic properties ------------------------------------------------------------


@pytest.mark.parametrize("calc", [POSSIBILITY, BOOLEAN])
def test_idempotent_combination(calc):
    rng = random.Random(2)
    for _ in range(50):
        G = calc.sample(random_subscope(rng, random_variables(rng, 3)), rng)
        assert deviation(calc.combine(G, G), G) == 0


def test_probability_marginalization_preserves_total():
    rng = random.Random(4)
    for _ in range(50):
        vs = random_variables(rng, 3)
        G = PROBABILITY.sample(random_subscope(rng, vs), rng)
        h = Scope(tuple(v for v in G.scope if rng.random() < 0.5))
        assert PROBABILITY.marginalize(G, h).table.sum() == pytest.approx(G.table.sum(), abs=1e-12)


@pytest.mark.parametrize("calc", BUILTINS, ids=lambda c: c.name)
def test_default_is_neutral_up_to_normalization(calc):
    rng = random.Random(8)
    for _ in range(50):
        vs = random_variables(rng, 3)
        h = random_subscope(rng, vs, min_size=1)
        g = random_subscope(rng, vs)
        H = calc.sample(h, rng)
        combined = calc.marginalize(calc.combine(calc.default(g), H), h)
        if calc is BELIEF:
            assert deviation(combined, H) <= 1e-12
            continue
        try:
            expected = calc.normalize(H)
        except DegenerateValuationError:
            continue
        assert deviation(calc.normalize(combined), expected) <= 1e-12
