"""Valuations and the pluggable calculus bundles.

Two valuation representations are provided:

* :class:`PointValuation` -- a dense numpy table over every configuration of
  its scope (probability, possibility and Boolean calculi, and any user
  calculus built with :func:`point_calculus`).
* :class:`MassValuation` -- a sparse basic probability assignment mapping
  non-empty sets of configurations to masses, plus the mass that unnormalized
  combination sends to the empty set (``conflict``).

A :class:`Calculus` bundles the operators the propagation engine needs.
"""

from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

import numpy as np

from .frames import (
    ConfigSet,
    Configuration,
    Scope,
    ScopeError,
    Variable,
    extend_mask,
    full_mask,
    project_mask,
)

POINT = "point"
MASS = "mass"


class ValuationError(ValueError):
    pass


class KindMismatchError(ValuationError):
    pass


class DegenerateValuationError(ValuationError):
    """The valuation carries no usable mass (all zero, all conflict...)."""


class CalculusError(ValueError):
    pass


class MissingFunctionError(CalculusError):
    pass


class DuplicateCalculusError(CalculusError):
    pass


class UnknownCalculusError(CalculusError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


# --- valuation types ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PointValuation:
    scope: Scope
    kind: str
    table: np.ndarray

    def __post_init__(self):
        table = np.array(self.table, dtype=bool if self.kind == "boolean" else float)
        if table.shape != self.scope.shape:
            if table.size != self.scope.size:
                raise ScopeError(
                    f"table with {table.size} entries for scope {self.scope!r} "
                    f"({self.scope.size} configurations)"
                )
            table = table.reshape(self.scope.shape)
        if self.kind == "probability" and np.any(table < 0):
            raise ValuationError("probability values must be non-negative")
        if self.kind == "possibility" and np.any((table < 0) | (table > 1)):
            raise ValuationError("possibility values must lie in [0, 1]")
        table.flags.writeable = False
        object.__setattr__(self, "table", table)

    def __getitem__(self, config) -> Any:
        if isinstance(config, Configuration):
            return self.table[config.values]
        if isinstance(config, dict):
            config = Configuration.from_labels(self.scope, config)
            return self.table[config.values]
        config = Configuration.from_labels(self.scope, tuple(config))
        return self.table[config.values]

    def __repr__(self) -> str:
        return f"PointValuation({self.kind}, {self.scope!r}, {self.table.tolist()!r})"


@dataclass(frozen=True, eq=False)
class MassValuation:
    scope: Scope
    focal: Mapping[int, float]
    conflict: float = 0.0
    kind: str = field(default="belief")

    def __post_init__(self):
        top = full_mask(self.scope)
        clean: dict[int, float] = {}
        for mask, m in self.focal.items():
            m = float(m)
            if not mask:
                raise ValuationError("the empty set cannot be a focal set")
            if mask & ~top:
                raise ScopeError(f"focal set outside the configurations of {self.scope!r}")
            if m < 0:
                raise ValuationError(f"negative mass {m}")
            if m > 0:
                clean[mask] = clean.get(mask, 0.0) + m
        if self.conflict < 0:
            raise ValuationError(f"negative conflict {self.conflict}")
        object.__setattr__(self, "focal", clean)
        object.__setattr__(self, "conflict", float(self.conflict))

    @classmethod
    def vacuous(cls, scope: Scope) -> "MassValuation":
        return cls(scope, {full_mask(scope): 1.0})

    @classmethod
    def from_sets(cls, scope: Scope, masses: Mapping[Any, float] | Iterable, *, complete: bool = False):
        """Build a bpa from ``{configuration set: mass}``.

        Keys may be :class:`ConfigSet` objects, iterables of
        :class:`Configuration`, or iterables of label tuples in canonical order.
        With ``complete=True`` any mass missing from 1 goes to the full set.
        """
        items = masses.items() if isinstance(masses, Mapping) else masses
        focal: dict[int, float] = defaultdict(float)
        for key, m in items:
            focal[_as_mask(scope, key)] += m
        if complete:
            rest = 1.0 - sum(focal.values())
            if rest < -1e-12:
                raise ValuationError(f"masses sum to {1.0 - rest:.6g} > 1")
            if rest > 0:
                focal[full_mask(scope)] += rest
        return cls(scope, dict(focal))

    @property
    def focal_total(self) -> float:
        return math.fsum(self.focal.values())

    @property
    def total(self) -> float:
        return self.focal_total + self.conflict

    def focal_sets(self) -> dict[ConfigSet, float]:
        return {ConfigSet(self.scope, k): v for k, v in self.focal.items()}

    def __getitem__(self, key) -> float:
        return self.focal.get(_as_mask(self.scope, key), 0.0)

    def __repr__(self) -> str:
        body = ", ".join(f"{ConfigSet(self.scope, k)!r}: {v:.6g}" for k, v in self.focal.items())
        return f"MassValuation({self.scope!r}, {{{body}}}, conflict={self.conflict:.6g})"


def _as_mask(scope: Scope, key) -> int:
    if isinstance(key, ConfigSet):
        if key.scope != scope:
            raise ScopeError(f"set over {key.scope!r} used with scope {scope!r}")
        return key.mask
    if isinstance(key, int):
        return key
    mask = 0
    for c in key:
        if not isinstance(c, Configuration):
            c = Configuration.from_labels(scope, (c,) if isinstance(c, str) else tuple(c))
        mask |= 1 << c.flat_index
    return mask


Valuation = PointValuation | MassValuation


# --- point operators ----------------------------------------------------------------


def _aligned(v: PointValuation, u: Scope) -> np.ndarray:
    # both scopes are canonically ordered, so inserting unit axes is a reshape
    return v.table.reshape([len(x) if x in v.scope else 1 for x in u])


def _point_combiner(op: np.ufunc):
    def combine(G: PointValuation, H: PointValuation) -> PointValuation:
        if G.kind != H.kind:
            raise KindMismatchError(f"cannot combine {G.kind} with {H.kind}")
        u = G.scope | H.scope
        return PointValuation(u, G.kind, op(_aligned(G, u), _aligned(H, u)))

    return combine


def _point_marginalizer(op: np.ufunc):
    def marginalize(G: PointValuation, h: Scope) -> PointValuation:
        if not h.issubset(G.scope):
            raise ScopeError(f"cannot marginalize {G.scope!r} to {h!r}")
        if h == G.scope:
            return G
        axes = tuple(i for i, v in enumerate(G.scope) if v not in h)
        return PointValuation(h, G.kind, op.reduce(G.table, axis=axes))

    return marginalize


# --- mass operators -----------------------------------------------------------------


def combine_mass(G: MassValuation, H: MassValuation) -> MassValuation:
    """Unnormalized Dempster combination; empty intersections feed ``conflict``."""
    if not isinstance(G, MassValuation) or not isinstance(H, MassValuation):
        raise KindMismatchError("combine_mass needs two mass valuations")
    u = G.scope | H.scope
    out: dict[int, float] = defaultdict(float)
    # the empty set absorbs: anything meeting an existing conflict stays in conflict
    conflict = G.conflict * H.total + G.focal_total * H.conflict
    ext_h = [(extend_mask(b, H.scope, u), mb) for b, mb in H.focal.items()]
    for a, ma in G.focal.items():
        ea = extend_mask(a, G.scope, u)
        for eb, mb in ext_h:
            c = ea & eb
            if c:
                out[c] += ma * mb
            else:
                conflict += ma * mb
    return MassValuation(u, dict(out), conflict)


def marginalize_mass(G: MassValuation, h: Scope) -> MassValuation:
    if not h.issubset(G.scope):
        raise ScopeError(f"cannot marginalize {G.scope!r} to {h!r}")
    if h == G.scope:
        return G
    out: dict[int, float] = defaultdict(float)
    for b, m in G.focal.items():
        out[project_mask(b, G.scope, h)] += m
    return MassValuation(h, dict(out), G.conflict)


def normalize_mass(G: MassValuation) -> MassValuation:
    total = G.focal_total
    if total <= 0:
        raise DegenerateValuationError("all mass is on the empty set (total conflict)")
    return MassValuation(G.scope, {k: v / total for k, v in G.focal.items()}, 0.0)


# --- readouts -----------------------------------------------------------------------


@dataclass(frozen=True)
class MarginalReadout:
    variable: Variable
    columns: tuple[str, ...]
    rows: tuple[tuple[str, tuple], ...]
    normalized: bool = False
    total: float | None = None
    conflict: float | None = None
    degenerate: bool = False

    def __getitem__(self, value: str) -> tuple:
        for label, row in self.rows:
            if label == value:
                return row
        raise KeyError(value)

    def column(self, name: str) -> dict[str, Any]:
        i = self.columns.index(name)
        return {label: row[i] for label, row in self.rows}

    def replace(self, **changes) -> "MarginalReadout":
        from dataclasses import replace

        return replace(self, **changes)


def _single(v) -> Variable:
    if len(v.scope) != 1:
        raise ScopeError(f"readout needs a single-variable marginal, got {v.scope!r}")
    return v.scope.variables[0]


def readout_probability(v: PointValuation) -> MarginalReadout:
    var = _single(v)
    rows = tuple((x, (float(p),)) for x, p in zip(var.frame, v.table))
    return MarginalReadout(var, ("p",), rows, total=float(v.table.sum()))


def readout_boolean(v: PointValuation) -> MarginalReadout:
    var = _single(v)
    return MarginalReadout(var, ("truth",), tuple((x, (bool(t),)) for x, t in zip(var.frame, v.table)))


def readout_possibility(v: PointValuation) -> MarginalReadout:
    var = _single(v)
    pi = [float(p) for p in v.table]
    rows = []
    for i, x in enumerate(var.frame):
        others = pi[:i] + pi[i + 1:]
        rows.append((x, (1.0 - max(others, default=0.0), pi[i])))
    return MarginalReadout(var, ("N", "Π"), tuple(rows), total=max(pi))


def readout_belief(v: MassValuation) -> MarginalReadout:
    var = _single(v)
    rows = []
    for i, x in enumerate(var.frame):
        bit = 1 << i
        bel = v.focal.get(bit, 0.0)
        pl = math.fsum(m for s, m in v.focal.items() if s & bit)
        rows.append((x, (bel, pl)))
    return MarginalReadout(var, ("bel", "pl"), tuple(rows), total=v.total, conflict=v.conflict)


def readout_verbatim(v) -> MarginalReadout:
    var = _single(v)
    if isinstance(v, MassValuation):
        return readout_belief(v)
    return MarginalReadout(var, ("value",), tuple((x, (t.item(),)) for x, t in zip(var.frame, v.table)))


# --- the calculus bundle ------------------------------------------------------------


def _identity(v):
    return v


@dataclass(frozen=True)
class Calculus:
    """Operator bundle for one uncertainty calculus.

    ``combine``, ``marginalize``, the two defaults and ``normalize`` are
    mandatory; ``post_propagate`` runs on every marginal before it is read
    out.  ``observation(variable, index)`` encodes certain evidence and
    ``sample(scope, rng)`` draws random valuations for the axiom checks; both
    are optional.  ``exact`` marks calculi whose laws hold bit-for-bit.
    """

    name: str
    kind: str = POINT
    combine: Callable | None = None
    marginalize: Callable | None = None
    default_variable: Callable[[Scope], Any] | None = None
    default_relation: Callable[[Scope], Any] | None = None
    normalize: Callable | None = None
    post_propagate: Callable = _identity
    readout: Callable = readout_verbatim
    observation: Callable[[Variable, int], Any] | None = None
    sample: Callable[[Scope, random.Random], Any] | None = None
    exact: bool = False

    REQUIRED = ("combine", "marginalize", "default_variable", "default_relation", "normalize")

    def default(self, scope: Scope, role: str = "relation"):
        if role == "variable":
            return self.default_variable(scope)
        if role == "relation":
            return self.default_relation(scope)
        raise ValueError(f"unknown role {role!r}")

    def accepts(self, v) -> bool:
        if self.kind == MASS:
            return isinstance(v, MassValuation)
        return isinstance(v, PointValuation) and v.kind == self.name

    def check(self, v) -> None:
        if not self.accepts(v):
            raise KindMismatchError(f"{type(v).__name__} ({getattr(v, 'kind', '?')}) is not a {self.name} valuation")

    def __repr__(self) -> str:
        return f"Calculus({self.name!r})"


def point_calculus(
    name: str,
    *,
    combine: np.ufunc,
    marginalize: np.ufunc,
    default_value: Callable[[Scope], Any],
    zero: Any,
    one: Any,
    normalize: Callable[[PointValuation], PointValuation] = _identity,
    readout: Callable = readout_verbatim,
    sample_value: Callable[[random.Random], Any] | None = None,
    post_propagate: Callable = _identity,
    exact: bool = False,
) -> Calculus:
    """Build a dense-table calculus from a pair of numpy ufuncs.

    ``combine`` merges aligned tables entry-wise and ``marginalize`` is
    reduced over the eliminated axes.  ``zero``/``one`` encode impossible and
    certain configurations for observations.
    """

    def default(scope: Scope) -> PointValuation:
        return PointValuation(scope, name, np.full(scope.shape, default_value(scope)))

    def observation(var: Variable, index: int) -> PointValuation:
        table = np.full(len(var), zero)
        table[index] = one
        return PointValuation(Scope.of(var), name, table)

    def sample(scope: Scope, rng: random.Random) -> PointValuation:
        return PointValuation(scope, name, np.array([sample_value(rng) for _ in range(scope.size)]))

    return Calculus(
        name=name,
        kind=POINT,
        combine=_point_combiner(combine),
        marginalize=_point_marginalizer(marginalize),
        default_variable=default,
        default_relation=default,
        normalize=normalize,
        post_propagate=post_propagate,
        readout=readout,
        observation=observation,
        sample=sample if sample_value is not None else None,
        exact=exact,
    )


# --- the four built-ins -------------------------------------------------------------


def _normalize_probability(v: PointValuation) -> PointValuation:
    total = v.table.sum()
    if total <= 0:
        raise DegenerateValuationError("probability table sums to zero")
    return PointValuation(v.scope, v.kind, v.table / total)


def _normalize_possibility(v: PointValuation) -> PointValuation:
    top = v.table.max()
    if top <= 0:
        raise DegenerateValuationError("possibility distribution is zero everywhere")
    return PointValuation(v.scope, v.kind, v.table / top)


def _sample_probability(rng: random.Random) -> float:
    return 0.0 if rng.random() < 0.1 else rng.random()


def _sample_possibility(rng: random.Random) -> float:
    r = rng.random()
    if r < 0.3:
        return 1.0
    if r < 0.4:
        return 0.0
    return rng.random()


def _observe_mass(var: Variable, index: int) -> MassValuation:
    return MassValuation(Scope.of(var), {1 << index: 1.0})


def _sample_mass(scope: Scope, rng: random.Random) -> MassValuation:
    top = full_mask(scope)
    focal: dict[int, float] = defaultdict(float)
    for _ in range(rng.randint(1, 3)):
        mask = rng.randint(1, top)
        focal[mask] += rng.random()
    if rng.random() < 0.5:
        focal[top] += rng.random()
    conflict = rng.random() * 0.2 if rng.random() < 0.2 else 0.0
    return MassValuation(scope, dict(focal), conflict)


def _vacuous(scope: Scope) -> MassValuation:
    return MassValuation.vacuous(scope)


PROBABILITY = point_calculus(
    "probability",
    combine=np.multiply,
    marginalize=np.add,
    default_value=lambda scope: 1.0 / scope.size,
    zero=0.0,
    one=1.0,
    normalize=_normalize_probability,
    readout=readout_probability,
    sample_value=_sample_probability,
)

POSSIBILITY = point_calculus(
    "possibility",
    combine=np.minimum,
    marginalize=np.maximum,
    default_value=lambda scope: 1.0,
    zero=0.0,
    one=1.0,
    normalize=_normalize_possibility,
    readout=readout_possibility,
    sample_value=_sample_possibility,
    exact=True,
)

BOOLEAN = point_calculus(
    "boolean",
    combine=np.logical_and,
    marginalize=np.logical_or,
    default_value=lambda scope: True,
    zero=False,
    one=True,
    readout=readout_boolean,
    sample_value=lambda rng: rng.random() < 0.6,
    exact=True,
)

BELIEF = Calculus(
    name="belief",
    kind=MASS,
    combine=combine_mass,
    marginalize=marginalize_mass,
    default_variable=_vacuous,
    default_relation=_vacuous,
    normalize=normalize_mass,
    readout=readout_belief,
    observation=_observe_mass,
    sample=_sample_mass,
)

BUILTINS = (PROBABILITY, BELIEF, BOOLEAN, POSSIBILITY)


# --- module-level operations --------------------------------------------------------


def combine_point(calculus: Calculus, G: PointValuation, H: PointValuation) -> PointValuation:
    calculus.check(G)
    calculus.check(H)
    return calculus.combine(G, H)


def marginalize_point(calculus: Calculus, G: PointValuation, h: Scope) -> PointValuation:
    calculus.check(G)
    return calculus.marginalize(G, h)


def combine(calculus: Calculus, G, H):
    calculus.check(G)
    calculus.check(H)
    return calculus.combine(G, H)


def marginalize(calculus: Calculus, G, h: Scope):
    calculus.check(G)
    return calculus.marginalize(G, h)


def normalize(calculus: Calculus, V):
    calculus.check(V)
    return calculus.normalize(V)


def default_valuation(calculus: Calculus, scope: Scope, role: str = "relation"):
    return calculus.default(scope, role)


def readout(calculus: Calculus, V) -> MarginalReadout:
    return calculus.readout(V)


def equal(a, b, atol: float = 0.0) -> bool:
    """Compare two valuations entry-wise; ``atol=0`` means bit-exact."""
    return deviation(a, b) <= atol


def deviation(a, b) -> float:
    """Largest absolute entry-wise difference (``inf`` when not comparable)."""
    if type(a) is not type(b) or a.scope != b.scope or a.kind != b.kind:
        return math.inf
    if isinstance(a, PointValuation):
        if a.table.dtype == bool or b.table.dtype == bool:
            return 0.0 if np.array_equal(a.table, b.table) else math.inf
        if a.table.size == 0:
            return 0.0
        same = a.table == b.table  # lets matching infinities compare equal
        diff = np.abs(np.subtract(a.table, b.table, where=~same, out=np.zeros(a.table.shape)))
        return float(np.max(diff))
    worst = abs(a.conflict - b.conflict)
    for k in a.focal.keys() | b.focal.keys():
        worst = max(worst, abs(a.focal.get(k, 0.0) - b.focal.get(k, 0.0)))
    return worst


# --- registry -----------------------------------------------------------------------


class CalculusRegistry:
    def __init__(self, calculi: Iterable[Calculus] = ()):
        self._by_name: dict[str, Calculus] = {}
        for c in calculi:
            self.register(c)

    def register(self, calculus: Calculus, *, replace: bool = False) -> Calculus:
        missing = [f for f in Calculus.REQUIRED if not callable(getattr(calculus, f, None))]
        for f in ("post_propagate", "readout"):
            if not callable(getattr(calculus, f, None)):
                missing.append(f)
        if missing:
            raise MissingFunctionError(f"calculus {calculus.name!r} lacks {', '.join(missing)}")
        if calculus.kind not in (POINT, MASS):
            raise CalculusError(f"unknown valuation kind {calculus.kind!r}")
        if calculus.name in self._by_name and not replace:
            raise DuplicateCalculusError(f"a calculus named {calculus.name!r} is already registered")
        self._by_name[calculus.name] = calculus
        return calculus

    def get(self, name: str | Calculus) -> Calculus:
        if isinstance(name, Calculus):
            return name
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownCalculusError(f"unknown calculus {name!r}") from None

    def names(self) -> list[str]:
        return list(self._by_name)

    def __contains__(self, name) -> bool:
        return name in self._by_name

    def __iter__(self):
        return iter(self._by_name.values())

    def copy(self) -> "CalculusRegistry":
        return CalculusRegistry(self._by_name.values())


registry = CalculusRegistry(BUILTINS)


def register_calculus(bundle: Calculus, *, replace: bool = False) -> Calculus:
    return registry.register(bundle, replace=replace)


def get_calculus(name: str | Calculus) -> Calculus:
    return registry.get(name)
