"""Local computation on Markov trees, plus a brute-force global evaluator.

Messages and potentials are never normalized; normalization happens once,
when a marginal is read out.  A cluster with nothing assigned to it carries
no potential at all (``None``), which every operation treats as the neutral
element, so unnormalized results equal the marginals of the global
valuation exactly.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .calculi import (
    Calculus,
    DegenerateValuationError,
    MarginalReadout,
    MassValuation,
    PointValuation,
    get_calculus,
)
from .frames import Scope
from .network import (
    MarkovTree,
    ModelError,
    UnknownNameError,
    ValuationSystem,
    build_hypergraph,
    build_markov_tree,
)


class PropagationError(RuntimeError):
    pass


class NoContainingClusterError(PropagationError):
    pass


class OracleBoundError(PropagationError):
    pass


@dataclass(frozen=True)
class NodePotential:
    cluster: Scope
    valuation: object | None


@dataclass(frozen=True)
class Message:
    source: int
    target: int
    valuation: object | None


def _combine(calculus: Calculus, items):
    acc = None
    for v in items:
        if v is None:
            continue
        acc = v if acc is None else calculus.combine(acc, v)
    return acc


def _covered(tree: MarkovTree) -> set[str]:
    return {n for e in tree.assignment for n in e.names}


def assign_potentials(tree: MarkovTree, system: ValuationSystem, calculus: Calculus | str) -> list[NodePotential]:
    calc = get_calculus(calculus)
    buckets: list[list] = [[] for _ in tree.clusters]
    covered = set()
    for scope, v in system.hyperedge_valuations(calc).items():
        i = tree.assignment.get(scope)
        if i is None:
            hosts = [k for k, c in enumerate(tree.clusters) if scope.issubset(c)]
            if not hosts:
                raise NoContainingClusterError(f"no cluster contains hyperedge {scope!r}")
            i = hosts[0]
        buckets[i].append(v)
        covered.update(scope.names)
    out = []
    for cluster, bucket in zip(tree.clusters, buckets):
        pot = _combine(calc, bucket)
        if pot is None and len(cluster) == 1 and cluster.names[0] not in covered:
            # isolated variable: nothing but its own default
            pot = calc.default_variable(cluster)
        out.append(NodePotential(cluster, pot))
    return out


@dataclass
class PropagationResult:
    calculus: Calculus
    marginals: dict[str, object]
    normalized: bool = True
    diagnostics: dict[str, str] = field(default_factory=dict)
    tree: MarkovTree | None = None
    potentials: list[NodePotential] | None = None
    messages: dict[tuple[int, int], object] = field(default_factory=dict)
    component_totals: list[object] = field(default_factory=list)

    def readout(self, variable: str) -> MarginalReadout:
        return marginal(self, variable)

    def belief(self, i: int):
        """Combined valuation at cluster ``i`` (potential times all incoming messages)."""
        incoming = [self.messages[(k, i)] for k in self.tree.neighbors(i)]
        return _combine(self.calculus, [self.potentials[i].valuation, *incoming])

    def marginal_from(self, variable: str, i: int):
        """Marginal of ``variable`` computed at cluster ``i`` (must contain it)."""
        cluster = self.tree.clusters[i]
        if variable not in cluster:
            raise ModelError(f"cluster {cluster!r} does not contain {variable}")
        comps = self.tree.components()
        mine = next(k for k, comp in enumerate(comps) if i in comp)
        b = self.belief(i)
        local = self.calculus.marginalize(b, Scope.of(cluster.variable(variable)))
        others = [t for k, t in enumerate(self.component_totals) if k != mine]
        return _combine(self.calculus, [local, *others])


def _schedule(tree: MarkovTree, component: list[int], root: int, rng: random.Random | None):
    """Directed edges of one tree in an order where every message's inputs come first."""
    if rng is None:
        order: list[tuple[int, int]] = []

        def collect(node, parent):
            for k in tree.neighbors(node):
                if k != parent:
                    collect(k, node)
                    order.append((k, node))

        def distribute(node, parent):
            for k in tree.neighbors(node):
                if k != parent:
                    order.append((node, k))
                    distribute(k, node)

        collect(root, None)
        distribute(root, None)
        return order

    pending = {(a, b) for a in component for b in tree.neighbors(a)}
    done: set[tuple[int, int]] = set()
    order = []
    while pending:
        ready = sorted(
            (a, b) for a, b in pending
            if all((k, a) in done for k in tree.neighbors(a) if k != b)
        )
        pick = ready[rng.randrange(len(ready))]
        pending.remove(pick)
        done.add(pick)
        order.append(pick)
    return order


def propagate(
    tree: MarkovTree,
    potentials: list[NodePotential],
    calculus: Calculus | str,
    *,
    normalized: bool = True,
    root: int | None = None,
    rng: random.Random | None = None,
) -> PropagationResult:
    """Two-phase message passing over every tree of the forest.

    ``root`` overrides the collect root of the tree containing it (default:
    the lexicographically least cluster of each tree); with ``rng`` the
    messages are computed in a random valid order instead.  Incoming messages
    are always combined in neighbour order, so the result is bit-identical
    whatever the root or schedule.
    """
    calc = get_calculus(calculus)
    pots = [p.valuation for p in potentials]
    messages: dict[tuple[int, int], object] = {}
    comps = tree.components()
    for comp in comps:
        r = root if root is not None and root in comp else comp[0]
        for a, b in _schedule(tree, comp, r, rng):
            incoming = [messages[(k, a)] for k in tree.neighbors(a) if k != b]
            acc = _combine(calc, [pots[a], *incoming])
            if acc is None:
                messages[(a, b)] = None
            else:
                sep = tree.separator(a, b) & acc.scope
                messages[(a, b)] = calc.marginalize(acc, sep)

    result = PropagationResult(calc, {}, normalized, tree=tree, potentials=list(potentials), messages=messages)
    for comp in comps:
        b = result.belief(comp[0])
        result.component_totals.append(None if b is None else calc.marginalize(b, Scope()))

    for name in sorted({v.name for c in tree.clusters for v in c}):
        host = tree.clusters_containing(name)[0]
        result.marginals[name] = result.marginal_from(name, host)
    _diagnose(result)
    return result


def _diagnose(result: PropagationResult) -> None:
    calc = result.calculus
    for name, m in result.marginals.items():
        m = calc.post_propagate(m)
        if isinstance(m, PointValuation) and m.table.dtype == bool and not m.table.any():
            result.diagnostics[name] = "all-false: the evidence is contradictory"
            continue
        try:
            calc.normalize(m)
        except DegenerateValuationError as exc:
            result.diagnostics[name] = f"degenerate: {exc}"


def marginal(result: PropagationResult, variable: str, calculus: Calculus | str | None = None) -> MarginalReadout:
    calc = get_calculus(calculus) if calculus is not None else result.calculus
    try:
        raw = result.marginals[variable]
    except KeyError:
        raise UnknownNameError(f"unknown variable {variable!r}") from None
    raw = calc.post_propagate(raw)
    degenerate = variable in result.diagnostics
    if result.normalized and not degenerate:
        return calc.readout(calc.normalize(raw)).replace(normalized=True)
    return calc.readout(raw).replace(normalized=False, degenerate=degenerate)


def evaluate(
    system: ValuationSystem,
    calculus: Calculus | str,
    *,
    normalized: bool = True,
    root: int | None = None,
    rng: random.Random | None = None,
) -> PropagationResult:
    """Compile ``system`` under ``calculus`` and propagate."""
    calc = get_calculus(calculus)
    tree = build_markov_tree(build_hypergraph(system, calc))
    return propagate(tree, assign_potentials(tree, system, calc), calc, normalized=normalized, root=root, rng=rng)


def global_evaluate(
    system: ValuationSystem,
    calculus: Calculus | str,
    *,
    normalized: bool = True,
    max_configurations: int = 10**6,
    max_focal_sets: int = 10**4,
) -> PropagationResult:
    """Combine everything into one joint valuation, then marginalize it.

    Exponential in the number of variables; meant as a correctness oracle.
    """
    calc = get_calculus(calculus)
    size = math.prod(len(v) for v in system.variables.values())
    if size > max_configurations:
        raise OracleBoundError(f"{size} joint configurations exceed the bound {max_configurations}")
    vals = list(system.hyperedge_valuations(calc).values())
    covered = {n for v in vals for n in v.scope.names}
    for name in sorted(system.variables):
        if name not in covered:
            vals.append(calc.default_variable(Scope.of(system.variables[name])))
    joint = None
    for v in vals:
        joint = v if joint is None else calc.combine(joint, v)
        if isinstance(joint, MassValuation) and len(joint.focal) > max_focal_sets:
            raise OracleBoundError(f"{len(joint.focal)} focal sets exceed the bound {max_focal_sets}")
    result = PropagationResult(calc, {}, normalized)
    for name in sorted(system.variables):
        result.marginals[name] = calc.marginalize(joint, Scope.of(system.variables[name]))
    if joint is not None:
        result.component_totals.append(calc.marginalize(joint, Scope()))
    _diagnose(result)
    return result
