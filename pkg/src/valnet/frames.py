"""Variables, frames, scopes and configurations.

A scope is always kept in canonical order (lexicographic by variable name),
and every dense table in the package is indexed row-major in that order.
Sets of configurations are stored as Python ints used as bitmasks over the
row-major configuration indices of their scope.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np


class ScopeError(ValueError):
    """Raised when a projection or extension is asked across incompatible scopes."""


class ModelError(ValueError):
    """Raised for structurally invalid models (bad frames, clashing variables...)."""


@dataclass(frozen=True)
class Variable:
    name: str
    frame: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "frame", tuple(self.frame))
        if not self.frame:
            raise ModelError(f"variable {self.name!r} has an empty frame")
        if len(set(self.frame)) != len(self.frame):
            raise ModelError(f"variable {self.name!r} has repeated frame values")

    def __len__(self) -> int:
        return len(self.frame)

    def index(self, value: str) -> int:
        try:
            return self.frame.index(value)
        except ValueError:
            raise ModelError(f"{value!r} is not in the frame of {self.name!r}") from None

    def __repr__(self) -> str:
        return f"Variable({self.name!r}, {list(self.frame)!r})"


@dataclass(frozen=True)
class Scope:
    """An ordered, duplicate-free set of variables (sorted by name)."""

    variables: tuple[Variable, ...] = ()

    def __post_init__(self):
        by_name: dict[str, Variable] = {}
        for v in self.variables:
            other = by_name.get(v.name)
            if other is not None and other != v:
                raise ModelError(f"variable {v.name!r} appears with two different frames")
            by_name[v.name] = v
        object.__setattr__(self, "variables", tuple(by_name[n] for n in sorted(by_name)))

    @classmethod
    def of(cls, *variables: Variable) -> "Scope":
        return cls(tuple(variables))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.variables)

    @property
    def size(self) -> int:
        """Number of configurations, |W_scope|."""
        return int(np.prod(self.shape, dtype=np.int64)) if self.variables else 1

    def __len__(self) -> int:
        return len(self.variables)

    def __iter__(self) -> Iterator[Variable]:
        return iter(self.variables)

    def __contains__(self, item) -> bool:
        if isinstance(item, Variable):
            return item in self.variables
        return item in self.names

    def position(self, name: str) -> int:
        return self.names.index(name)

    def variable(self, name: str) -> Variable:
        return self.variables[self.position(name)]

    def union(self, other: "Scope") -> "Scope":
        return Scope(self.variables + other.variables)

    def intersection(self, other: "Scope") -> "Scope":
        names = set(other.names)
        return Scope(tuple(v for v in self.variables if v.name in names))

    def difference(self, other: "Scope") -> "Scope":
        names = set(other.names)
        return Scope(tuple(v for v in self.variables if v.name not in names))

    def issubset(self, other: "Scope") -> bool:
        return all(v in other.variables for v in self.variables)

    def __le__(self, other: "Scope") -> bool:
        return self.issubset(other)

    def __or__(self, other: "Scope") -> "Scope":
        return self.union(other)

    def __and__(self, other: "Scope") -> "Scope":
        return self.intersection(other)

    def __sub__(self, other: "Scope") -> "Scope":
        return self.difference(other)

    def __repr__(self) -> str:
        return "{" + ",".join(self.names) + "}"


@dataclass(frozen=True)
class Configuration:
    scope: Scope
    values: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(i) for i in self.values))
        if len(self.values) != len(self.scope):
            raise ScopeError(f"configuration of length {len(self.values)} for scope {self.scope!r}")
        for v, i in zip(self.scope, self.values):
            if not 0 <= i < len(v):
                raise ScopeError(f"index {i} outside the frame of {v.name!r}")

    @classmethod
    def from_labels(cls, scope: Scope, labels: dict[str, str] | Sequence[str]) -> "Configuration":
        """Build a configuration from value labels (a name->value map, or a sequence in canonical order)."""
        if isinstance(labels, dict):
            if set(labels) != set(scope.names):
                raise ScopeError(f"labels {sorted(labels)} do not cover scope {scope!r}")
            labels = [labels[n] for n in scope.names]
        return cls(scope, tuple(v.index(x) for v, x in zip(scope, labels)))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(v.frame[i] for v, i in zip(self.scope, self.values))

    @property
    def flat_index(self) -> int:
        if not self.values:
            return 0
        return int(np.ravel_multi_index(self.values, self.scope.shape))

    def __repr__(self) -> str:
        return "(" + ",".join(self.labels) + ")"


@dataclass(frozen=True)
class ConfigSet:
    """A set of configurations over one scope, stored as a bitmask of flat indices."""

    scope: Scope
    mask: int = 0

    @classmethod
    def from_configurations(cls, scope: Scope, configs: Iterable[Configuration]) -> "ConfigSet":
        mask = 0
        for c in configs:
            if c.scope != scope:
                raise ScopeError(f"configuration over {c.scope!r} in a set over {scope!r}")
            mask |= 1 << c.flat_index
        return cls(scope, mask)

    @classmethod
    def full(cls, scope: Scope) -> "ConfigSet":
        return cls(scope, full_mask(scope))

    @property
    def members(self) -> frozenset[Configuration]:
        return frozenset(iter(self))

    def __iter__(self) -> Iterator[Configuration]:
        shape = self.scope.shape
        for i in mask_indices(self.mask):
            values = np.unravel_index(i, shape) if shape else ()
            yield Configuration(self.scope, tuple(values))

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __contains__(self, config: Configuration) -> bool:
        return config.scope == self.scope and bool(self.mask >> config.flat_index & 1)

    def __bool__(self) -> bool:
        return self.mask != 0

    def __repr__(self) -> str:
        return "{" + " ".join(repr(c) for c in self) + "}"


def enumerate_configurations(scope: Scope) -> list[Configuration]:
    """All configurations of ``scope`` in row-major order."""
    return [Configuration(scope, values) for values in np.ndindex(*scope.shape)]


def project_config(x: Configuration, h: Scope) -> Configuration:
    if not h.issubset(x.scope):
        raise ScopeError(f"cannot project {x.scope!r} onto {h!r}")
    return Configuration(h, tuple(x.values[x.scope.position(n)] for n in h.names))


def extend_config(x: Configuration, k: Scope) -> ConfigSet:
    if not x.scope.issubset(k):
        raise ScopeError(f"cannot extend {x.scope!r} to {k!r}")
    return ConfigSet(k, extend_mask(1 << x.flat_index, x.scope, k))


def project_config_set(a: ConfigSet, h: Scope) -> ConfigSet:
    if not h.issubset(a.scope):
        raise ScopeError(f"cannot project {a.scope!r} onto {h!r}")
    return ConfigSet(h, project_mask(a.mask, a.scope, h))


def extend_config_set(a: ConfigSet, k: Scope) -> ConfigSet:
    """Cylinder extension of a whole set: every y in W_k whose projection lies in ``a``."""
    if not a.scope.issubset(k):
        raise ScopeError(f"cannot extend {a.scope!r} to {k!r}")
    return ConfigSet(k, extend_mask(a.mask, a.scope, k))


# --- index maps and bitmask kernels -------------------------------------------------


@lru_cache(maxsize=4096)
def projection_map(g: Scope, h: Scope) -> np.ndarray:
    """For each flat index of W_g, the flat index of its projection in W_h (h ⊆ g)."""
    if not h.issubset(g):
        raise ScopeError(f"cannot project {g!r} onto {h!r}")
    if not h.variables:
        return np.zeros(g.size, dtype=np.int64)
    grids = np.indices(g.shape).reshape(len(g), -1) if g.variables else np.zeros((0, 1), np.int64)
    rows = [grids[g.position(n)] for n in h.names]
    out = np.ravel_multi_index(rows, h.shape)
    out.flags.writeable = False
    return out


def full_mask(scope: Scope) -> int:
    return (1 << scope.size) - 1


def mask_to_bits(mask: int, n: int) -> np.ndarray:
    raw = mask.to_bytes((n + 7) // 8 or 1, "little")
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[:n].astype(bool)


def bits_to_mask(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def mask_indices(mask: int) -> Iterator[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


@lru_cache(maxsize=65536)
def extend_mask(mask: int, g: Scope, k: Scope) -> int:
    if g == k:
        return mask
    bits = mask_to_bits(mask, g.size)
    return bits_to_mask(bits[projection_map(k, g)])


@lru_cache(maxsize=65536)
def project_mask(mask: int, g: Scope, h: Scope) -> int:
    if g == h:
        return mask
    bits = mask_to_bits(mask, g.size)
    out = np.zeros(h.size, dtype=bool)
    out[projection_map(g, h)[bits]] = True
    return bits_to_mask(out)
