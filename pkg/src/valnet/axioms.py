"""Randomized checks of the three local-computation laws for any calculus.

* combination is commutative and associative;
* marginalization is consonant: (G↓h)↓k = G↓k for k ⊆ h ⊆ g;
* marginalization distributes over combination: (G⊗H)↓g = G⊗(H↓g∩h).

A calculus must provide ``sample`` for these checks to run.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .calculi import Calculus, CalculusError, deviation, get_calculus
from .frames import Scope
from .randomized import random_subscope, random_variables

LAWS = ("commutativity", "associativity", "consonance", "distributivity")


@dataclass
class AxiomReport:
    calculus: str
    instances: int
    tolerance: float
    failures: dict[str, int] = field(default_factory=lambda: dict.fromkeys(LAWS, 0))
    worst: dict[str, float] = field(default_factory=lambda: dict.fromkeys(LAWS, 0.0))

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())

    def __str__(self) -> str:
        parts = [f"{law}: {self.failures[law]} failures (max dev {self.worst[law]:.2e})" for law in LAWS]
        return f"{self.calculus} x{self.instances} @ {self.tolerance:g}: " + "; ".join(parts)


def _subset(rng: random.Random, scope: Scope) -> Scope:
    return Scope(tuple(v for v in scope if rng.random() < 0.5))


def check_axioms(
    calculus: Calculus | str,
    instances: int = 500,
    seed: int = 0,
    tolerance: float | None = None,
    max_frame: int = 3,
) -> AxiomReport:
    """Check every law on ``instances`` random valuation triples (scopes of at most 3 variables)."""
    calc = get_calculus(calculus)
    if calc.sample is None:
        raise CalculusError(f"calculus {calc.name!r} has no sampler")
    tol = (0.0 if calc.exact else 1e-9) if tolerance is None else tolerance
    report = AxiomReport(calc.name, instances, tol)
    rng = random.Random(seed)

    def record(law, a, b):
        d = deviation(a, b)
        report.worst[law] = max(report.worst[law], d)
        if d > tol:
            report.failures[law] += 1

    for _ in range(instances):
        universe = random_variables(rng, 4, max_frame=max_frame)
        g, h, k = (random_subscope(rng, universe) for _ in range(3))
        G, H, K = calc.sample(g, rng), calc.sample(h, rng), calc.sample(k, rng)
        comb, marg = calc.combine, calc.marginalize

        record("commutativity", comb(G, H), comb(H, G))
        record("associativity", comb(G, comb(H, K)), comb(comb(G, H), K))

        sub_h = _subset(rng, g)
        sub_k = _subset(rng, sub_h)
        record("consonance", marg(marg(G, sub_h), sub_k), marg(G, sub_k))

        record("distributivity", marg(comb(G, H), g), comb(G, marg(H, g & h)))
    return report
