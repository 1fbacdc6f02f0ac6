"""Random models for property checks: variables, scopes, hypergraphs, systems."""

from __future__ import annotations

import random
from typing import Sequence

from .calculi import Calculus, get_calculus
from .frames import Scope, Variable
from .network import Hypergraph, ValuationSystem

NAMES = "ABCDEFGHIJ"


def random_variables(rng: random.Random, count: int, max_frame: int = 3, min_frame: int = 1) -> list[Variable]:
    return [
        Variable(NAMES[i], tuple(f"{NAMES[i].lower()}{j}" for j in range(rng.randint(min_frame, max_frame))))
        for i in range(count)
    ]


def random_subscope(rng: random.Random, variables: Sequence[Variable], max_size: int = 3, min_size: int = 0) -> Scope:
    k = rng.randint(min_size, min(max_size, len(variables)))
    return Scope(tuple(rng.sample(list(variables), k)))


def random_hypergraph(rng: random.Random, max_variables: int = 6, max_edges: int = 6) -> Hypergraph:
    variables = random_variables(rng, rng.randint(1, max_variables))
    edges = [random_subscope(rng, variables, max_size=4, min_size=1) for _ in range(rng.randint(0, max_edges))]
    return Hypergraph(tuple(variables), tuple(edges))


def random_system(
    rng: random.Random,
    calculi: Sequence[Calculus | str],
    max_variables: int = 5,
    max_relations: int = 4,
    max_frame: int = 3,
) -> ValuationSystem:
    """A random valuation system with valuations attached for every calculus in ``calculi``.

    Relations get a valuation with probability 0.8, variables with 0.3, and a
    variable is observed with probability 0.25.
    """
    calcs = [get_calculus(c) for c in calculi]
    system = ValuationSystem()
    variables = random_variables(rng, rng.randint(1, max_variables), max_frame=max_frame)
    for v in variables:
        system.add_variable(v.name, v.frame)
    for r in range(rng.randint(0, max_relations)):
        scope = random_subscope(rng, variables, max_size=3, min_size=1)
        order = list(scope.names)
        rng.shuffle(order)
        system.add_relation(f"r{r}", order)
    for name in list(system.relations) + list(system.variables):
        attach = rng.random() < (0.8 if name in system.relations else 0.3)
        if attach:
            scope = system.scope_of(name)
            for c in calcs:
                system.attach(name, c, c.sample(scope, rng))
    for v in variables:
        if rng.random() < 0.25:
            system.observe(v.name, rng.choice(v.frame))
    return system
