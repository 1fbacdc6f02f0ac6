"""Executes parsed documents against a valuation system."""

from __future__ import annotations

import sys
from typing import TextIO

import numpy as np

from ..calculi import (
    MASS,
    CalculusRegistry,
    MassValuation,
    PointValuation,
    ValuationError,
    deviation,
    registry as default_registry,
)
from ..frames import Configuration, ModelError, ScopeError, full_mask
from ..network import ValuationSystem, build_hypergraph, build_markov_tree, validate_tree
from ..propagation import PropagationError, PropagationResult, evaluate, global_evaluate, marginal
from .render import render
from .syntax import (
    CalculusStmt,
    DenseValStmt,
    MassValStmt,
    NetworkDocument,
    ObserveStmt,
    PropagateStmt,
    QueryStmt,
    RelStmt,
    ResetStmt,
    RetractStmt,
    Statement,
    VarStmt,
)

ORACLE_TOLERANCE = 1e-9


class StatementError(RuntimeError):
    def __init__(self, message: str, line: int = 0):
        super().__init__(message)
        self.line = line

    def __str__(self) -> str:
        return f"line {self.line}: {self.args[0]}" if self.line else str(self.args[0])


class StaleResultError(StatementError):
    pass


def dense_valuation(system: ValuationSystem, target: str, calculus: str, values) -> PointValuation:
    """Build a table from values listed row-major over the target's declared order."""
    order = system.declared_order(target)
    scope = system.scope_of(target)
    table = np.array(values).reshape([len(system.variables[n]) for n in order])
    table = table.transpose([order.index(n) for n in scope.names])
    return PointValuation(scope, calculus, table)


def mass_valuation(system: ValuationSystem, target: str, entries) -> MassValuation:
    """Build a bpa; whatever mass is left below 1 goes to the full configuration set."""
    order = system.declared_order(target)
    scope = system.scope_of(target)
    focal: dict[int, float] = {}
    for m, configs in entries:
        if configs is None:
            mask = full_mask(scope)
        else:
            mask = 0
            for labels in configs:
                c = Configuration.from_labels(scope, dict(zip(order, labels)))
                mask |= 1 << c.flat_index
        focal[mask] = focal.get(mask, 0.0) + m
    rest = 1.0 - sum(focal.values())
    if rest < -1e-9:
        raise ValuationError(f"masses for {target!r} sum to more than 1")
    if rest > 0:
        top = full_mask(scope)
        focal[top] = focal.get(top, 0.0) + rest
    return MassValuation(scope, focal)


class Session:
    def __init__(
        self,
        *,
        registry: CalculusRegistry | None = None,
        calculus: str = "probability",
        normalized: bool = True,
        oracle_check: bool = False,
        out: TextIO | None = None,
        err: TextIO | None = None,
    ):
        self.registry = registry or default_registry
        self.calculus = self.registry.get(calculus)
        self.normalized = normalized
        self.oracle_check = oracle_check
        self.out = out or sys.stdout
        self.err = err or sys.stderr
        self.system = ValuationSystem()
        self.result: PropagationResult | None = None
        self.errors = 0
        self.outputs: list[str] = []

    def run(self, doc: NetworkDocument) -> int:
        """Execute every statement; returns 1 if any of them failed, else 0."""
        for stmt in doc:
            self.execute_safely(stmt)
        return 1 if self.errors else 0

    def execute_safely(self, stmt: Statement) -> str | None:
        try:
            return self.execute(stmt)
        except StatementError as exc:
            if not exc.line:
                exc.line = stmt.line
            self._fail(exc)
        except (ModelError, ScopeError, ValuationError, PropagationError, KeyError) as exc:
            self._fail(StatementError(str(exc), stmt.line))
        return None

    def _fail(self, exc: StatementError) -> None:
        self.errors += 1
        print(f"error: {exc}", file=self.err)

    def _touch(self) -> None:
        self.result = None

    def execute(self, stmt: Statement) -> str | None:
        sys_ = self.system
        if isinstance(stmt, CalculusStmt):
            self.calculus = self.registry.get(stmt.name)
            self._touch()
        elif isinstance(stmt, VarStmt):
            sys_.add_variable(stmt.name, stmt.frame)
            self._touch()
        elif isinstance(stmt, RelStmt):
            sys_.add_relation(stmt.name, stmt.variables)
            self._touch()
        elif isinstance(stmt, DenseValStmt):
            calc = self.registry.get(stmt.calculus)
            sys_.attach(stmt.target, calc, dense_valuation(sys_, stmt.target, calc.name, stmt.values))
            self._touch()
        elif isinstance(stmt, MassValStmt):
            calc = self.registry.get(stmt.calculus)
            if calc.kind != MASS:
                raise StatementError(f"calculus {calc.name!r} does not take masses", stmt.line)
            sys_.attach(stmt.target, calc, mass_valuation(sys_, stmt.target, stmt.entries))
            self._touch()
        elif isinstance(stmt, ObserveStmt):
            sys_.observe(stmt.variable, stmt.value)
            self._touch()
        elif isinstance(stmt, RetractStmt):
            sys_.retract(stmt.variable)
            self._touch()
        elif isinstance(stmt, ResetStmt):
            sys_.reset()
            self._touch()
        elif isinstance(stmt, PropagateStmt):
            self.propagate(stmt)
        elif isinstance(stmt, QueryStmt):
            return self.query(stmt)
        else:
            raise StatementError(f"unsupported statement {stmt!r}", getattr(stmt, "line", 0))
        return None

    def propagate(self, stmt: PropagateStmt) -> PropagationResult:
        normalized = self.normalized if stmt.mode is None else stmt.mode == "normalized"
        if not self.system.variables:
            raise StatementError("nothing to propagate: no variables declared", stmt.line)
        result = evaluate(self.system, self.calculus, normalized=normalized)
        for name, diag in result.diagnostics.items():
            print(f"warning: line {stmt.line}: {name}: {diag}", file=self.err)
        if self.oracle_check:
            oracle = global_evaluate(self.system, self.calculus, normalized=normalized)
            for name in sorted(self.system.variables):
                d = deviation(result.marginals[name], oracle.marginals[name])
                if d > ORACLE_TOLERANCE:
                    self.result = result
                    raise StatementError(f"oracle check failed for {name}: deviation {d:.3g}", stmt.line)
        self.result = result
        return result

    def query(self, stmt: QueryStmt) -> str:
        if self.result is None:
            raise StaleResultError(f"query {stmt.variable}: no current propagation (run 'propagate' first)",
                                   stmt.line)
        text = render(marginal(self.result, stmt.variable), self.result.calculus.name)
        self.outputs.append(text)
        self.out.write(text)
        return text


def validate_document(doc: NetworkDocument, *, registry: CalculusRegistry | None = None,
                      out: TextIO | None = None, err: TextIO | None = None) -> int:
    """Load the structure and check the Markov tree built for every calculus the document uses."""
    out = out or sys.stdout
    err = err or sys.stderr
    session = Session(registry=registry, out=out, err=err)
    used = {session.calculus.name}
    for stmt in doc:
        if isinstance(stmt, (PropagateStmt, QueryStmt)):
            continue
        session.execute_safely(stmt)
        if isinstance(stmt, CalculusStmt):
            used.add(stmt.name)
    system = session.system
    if not system.variables:
        print("error: no variables declared", file=err)
        return 1
    status = 1 if session.errors else 0
    for name in sorted(used):
        calc = session.registry.get(name)
        hypergraph = build_hypergraph(system, calc)
        tree = build_markov_tree(hypergraph)
        report = validate_tree(tree, hypergraph)
        if report.ok:
            print(f"ok {name}: {len(system.variables)} variables, {len(system.relations)} relations, "
                  f"{len(tree.clusters)} clusters", file=out)
        else:
            status = 1
            for v in report.violations:
                print(f"error: {name}: {v}", file=err)
    return status
