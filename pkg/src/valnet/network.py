"""Valuation systems and their compilation into Markov trees."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .calculi import Calculus, KindMismatchError, get_calculus
from .frames import ModelError, Scope, ScopeError, Variable


class UnknownNameError(ModelError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class DuplicateNameError(ModelError):
    pass


class ValuationSystem:
    """Structural knowledge (variables, relations) plus per-calculus valuations.

    Variables and relations share one namespace so that a valuation target is
    unambiguous.  Relations remember the variable order they were declared
    with (used for textual input); their scope is canonical as usual.
    """

    def __init__(self):
        self.variables: dict[str, Variable] = {}
        self.relations: dict[str, tuple[str, ...]] = {}
        self.attached: dict[tuple[str, str], object] = {}
        self.observations: dict[str, str] = {}

    # structure

    def add_variable(self, name: str, frame: Iterable[str]) -> Variable:
        self._fresh(name)
        var = Variable(name, tuple(frame))
        self.variables[name] = var
        return var

    def add_relation(self, name: str, variables: Iterable[str]) -> Scope:
        self._fresh(name)
        names = tuple(variables)
        if not names:
            raise ModelError(f"relation {name!r} links no variables")
        if len(set(names)) != len(names):
            raise ModelError(f"relation {name!r} repeats a variable")
        for n in names:
            self.variable(n)
        self.relations[name] = names
        return self.scope_of(name)

    def _fresh(self, name: str) -> None:
        if name in self.variables or name in self.relations:
            raise DuplicateNameError(f"name {name!r} is already declared")

    def variable(self, name: str) -> Variable:
        try:
            return self.variables[name]
        except KeyError:
            raise UnknownNameError(f"unknown variable {name!r}") from None

    def scope_of(self, target: str) -> Scope:
        if target in self.relations:
            return Scope(tuple(self.variables[n] for n in self.relations[target]))
        if target in self.variables:
            return Scope.of(self.variables[target])
        raise UnknownNameError(f"unknown variable or relation {target!r}")

    def declared_order(self, target: str) -> tuple[str, ...]:
        if target in self.relations:
            return self.relations[target]
        self.scope_of(target)
        return (target,)

    # quantitative knowledge

    def attach(self, target: str, calculus: Calculus | str, valuation) -> None:
        calc = get_calculus(calculus) if isinstance(calculus, str) else calculus
        scope = self.scope_of(target)
        calc.check(valuation)
        if valuation.scope != scope:
            raise ScopeError(f"valuation over {valuation.scope!r} attached to {target!r} over {scope!r}")
        self.attached[(target, calc.name)] = valuation

    def detach(self, target: str, calculus: Calculus | str | None = None) -> None:
        names = [calculus.name if isinstance(calculus, Calculus) else calculus] if calculus else None
        for key in list(self.attached):
            if key[0] == target and (names is None or key[1] in names):
                del self.attached[key]

    def attachment(self, target: str, calculus: Calculus | str):
        name = calculus.name if isinstance(calculus, Calculus) else calculus
        return self.attached.get((target, name))

    def observe(self, variable: str, value: str) -> None:
        self.variable(variable).index(value)
        self.observations[variable] = value

    def retract(self, variable: str) -> None:
        self.variable(variable)
        self.observations.pop(variable, None)

    def reset(self) -> None:
        """Drop every valuation and observation; the structure is kept."""
        self.attached.clear()
        self.observations.clear()

    def copy(self) -> "ValuationSystem":
        other = ValuationSystem()
        other.variables = dict(self.variables)
        other.relations = dict(self.relations)
        other.attached = dict(self.attached)
        other.observations = dict(self.observations)
        return other

    # compilation helpers

    def evidence_variables(self, calculus: Calculus) -> list[str]:
        """Variables carrying a user valuation or an observation under ``calculus``."""
        return [
            n for n in sorted(self.variables)
            if (n, calculus.name) in self.attached or n in self.observations
        ]

    def hyperedge_valuations(self, calculus: Calculus) -> dict[Scope, object]:
        """One valuation per hyperedge: everything defined on that scope, combined.

        Relations contribute their attached valuation or the calculus default;
        variables contribute their attached valuation and/or an observation.
        """
        pieces: dict[Scope, list] = {}
        for name in sorted(self.relations):
            scope = self.scope_of(name)
            v = self.attached.get((name, calculus.name))
            pieces.setdefault(scope, []).append(v if v is not None else calculus.default_relation(scope))
        for name in self.evidence_variables(calculus):
            var = self.variables[name]
            scope = Scope.of(var)
            bucket = pieces.setdefault(scope, [])
            v = self.attached.get((name, calculus.name))
            if v is not None:
                bucket.append(v)
            if name in self.observations:
                if calculus.observation is None:
                    raise KindMismatchError(f"calculus {calculus.name!r} cannot encode observations")
                bucket.append(calculus.observation(var, var.index(self.observations[name])))
        out = {}
        for scope in sorted(pieces, key=cluster_key):
            vals = pieces[scope]
            acc = vals[0]
            for v in vals[1:]:
                acc = calculus.combine(acc, v)
            out[scope] = acc
        return out


@dataclass(frozen=True)
class Hypergraph:
    nodes: tuple[Variable, ...]
    hyperedges: tuple[Scope, ...]

    def __post_init__(self):
        nodes = tuple(sorted(set(self.nodes), key=lambda v: v.name))
        edges = tuple(sorted(set(self.hyperedges), key=cluster_key))
        known = set(nodes)
        for e in edges:
            if not e.variables:
                raise ModelError("empty hyperedge")
            if not set(e.variables) <= known:
                raise ModelError(f"hyperedge {e!r} uses unknown variables")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "hyperedges", edges)


def cluster_key(scope: Scope) -> tuple[str, ...]:
    return scope.names


def build_hypergraph(system: ValuationSystem, calculus: Calculus | str) -> Hypergraph:
    calc = get_calculus(calculus) if isinstance(calculus, str) else calculus
    edges = [system.scope_of(r) for r in system.relations]
    edges += [Scope.of(system.variables[n]) for n in system.evidence_variables(calc)]
    return Hypergraph(tuple(system.variables.values()), tuple(edges))


@dataclass(frozen=True)
class MarkovTree:
    """Clusters joined by tree edges; ``assignment`` maps hyperedges to a containing cluster index."""

    clusters: tuple[Scope, ...]
    edges: tuple[tuple[int, int], ...]
    assignment: Mapping[Scope, int] = field(default_factory=dict)

    def separator(self, i: int, j: int) -> Scope:
        return self.clusters[i] & self.clusters[j]

    def neighbors(self, i: int) -> list[int]:
        out = [b for a, b in self.edges if a == i] + [a for a, b in self.edges if b == i]
        return sorted(out)

    def components(self) -> list[list[int]]:
        """Cluster indices grouped by tree, each sorted; trees ordered by least cluster."""
        parent = list(range(len(self.clusters)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.edges:
            parent[find(a)] = find(b)
        groups: dict[int, list[int]] = {}
        for i in range(len(self.clusters)):
            groups.setdefault(find(i), []).append(i)
        return sorted(groups.values(), key=lambda g: g[0])

    def clusters_containing(self, name: str) -> list[int]:
        return [i for i, c in enumerate(self.clusters) if name in c]


def _elimination_cliques(adj: dict[str, set[str]]) -> list[frozenset[str]]:
    """Min-fill elimination, ties by min degree then name; returns the elimination cliques."""
    adj = {v: set(n) for v, n in adj.items()}
    cliques = []
    while adj:
        def cost(v):
            nb = sorted(adj[v])
            fill = sum(1 for i, a in enumerate(nb) for b in nb[i + 1:] if b not in adj[a])
            return fill, len(nb), v

        v = min(adj, key=cost)
        nb = adj.pop(v)
        cliques.append(frozenset(nb | {v}))
        for a in nb:
            adj[a].discard(v)
            adj[a] |= nb - {a}
    return cliques


def build_markov_tree(hypergraph: Hypergraph) -> MarkovTree:
    """Triangulate by min-fill elimination and join the maximal cliques.

    Cliques are connected by a maximum-weight spanning forest over separator
    sizes (Kruskal, ties broken lexicographically); clusters with empty
    separators stay in separate trees.
    """
    if not hypergraph.nodes:
        raise ModelError("cannot build a Markov tree for an empty hypergraph")
    by_name = {v.name: v for v in hypergraph.nodes}
    adj: dict[str, set[str]] = {n: set() for n in by_name}
    for e in hypergraph.hyperedges:
        for a in e.names:
            adj[a] |= set(e.names) - {a}

    cliques = _elimination_cliques(adj)
    maximal = []
    for c in sorted(set(cliques), key=lambda c: (-len(c), sorted(c))):
        if not any(c <= m for m in maximal):
            maximal.append(c)
    clusters = sorted((Scope(tuple(by_name[n] for n in c)) for c in maximal), key=cluster_key)

    candidates = []
    for i in range(len(clusters)):
        for j in range(i + 1, len(clusters)):
            w = len(clusters[i] & clusters[j])
            if w:
                candidates.append((-w, cluster_key(clusters[i]), cluster_key(clusters[j]), i, j))
    candidates.sort()
    parent = list(range(len(clusters)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    for *_, i, j in candidates:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j))

    return MarkovTree(tuple(clusters), tuple(sorted(edges)), assign_hyperedges(clusters, hypergraph.hyperedges))


def assign_hyperedges(clusters, hyperedges) -> dict[Scope, int]:
    """Each hyperedge goes to the smallest containing cluster (ties: lexicographic)."""
    out = {}
    for e in hyperedges:
        hosts = [i for i, c in enumerate(clusters) if e.issubset(c)]
        if hosts:
            out[e] = min(hosts, key=lambda i: (len(clusters[i]), cluster_key(clusters[i])))
    return out


@dataclass(frozen=True)
class TreeReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_tree(tree: MarkovTree, hypergraph: Hypergraph | None = None) -> TreeReport:
    """Check acyclicity, running intersection and hyperedge coverage."""
    problems: list[str] = []
    n = len(tree.clusters)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in tree.edges:
        if not (0 <= a < n and 0 <= b < n) or a == b:
            problems.append(f"edge ({a}, {b}) does not join two distinct clusters")
            continue
        ra, rb = find(a), find(b)
        if ra == rb:
            problems.append(f"edge {tree.clusters[a]!r}-{tree.clusters[b]!r} closes a cycle")
        else:
            parent[ra] = rb

    names = sorted({v.name for c in tree.clusters for v in c})
    for name in names:
        holding = tree.clusters_containing(name)
        if not holding:
            continue
        sub = {i: i for i in holding}

        def sfind(x):
            while sub[x] != x:
                x = sub[x]
            return x

        for a, b in tree.edges:
            if a in sub and b in sub:
                ra, rb = sfind(a), sfind(b)
                if ra != rb:
                    sub[ra] = rb
        if len({sfind(i) for i in holding}) > 1:
            problems.append(f"running intersection fails for {name}: {[tree.clusters[i] for i in holding]}")

    if hypergraph is not None:
        for v in hypergraph.nodes:
            if v.name not in names:
                problems.append(f"variable {v.name} is in no cluster")
        for e in hypergraph.hyperedges:
            if not any(e.issubset(c) for c in tree.clusters):
                problems.append(f"hyperedge {e!r} is not covered by any cluster")
            elif e in tree.assignment and not e.issubset(tree.clusters[tree.assignment[e]]):
                problems.append(f"hyperedge {e!r} is assigned to a cluster that does not contain it")
    return TreeReport(tuple(problems))
