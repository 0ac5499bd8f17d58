"""
DIMACS CNF reading and satisfiability checking.

The built-in solver is a DPLL search with two watched literals per clause and
chronological backtracking. ``solve_dimacs(..., solver="sympy")`` hands the same
text to sympy's DPLL instead.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional

logger = logging.getLogger(__name__)

SOLVERS = ("builtin", "sympy")


@dataclass
class Cnf:
    num_vars: int
    clauses: List[List[int]] = field(default_factory=list)


class SatResult(NamedTuple):
    """``model`` maps every variable the search assigned; variables in no clause are absent."""
    satisfiable: bool
    model: Dict[int, bool]


def parse_dimacs(text: str) -> Cnf:
    """
    Parse DIMACS CNF text.

    Args:
        text (str): Comment lines (``c``), one ``p cnf <vars> <clauses>`` header
            and zero-terminated clauses

    Returns:
        Cnf: The variable count from the header and the clause list
    """
    num_vars = None
    declared = None
    clauses = []
    current = []
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {number}: malformed header {line!r}")
            num_vars, declared = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise ValueError(f"line {number}: clause before the 'p cnf' header")
        for token in line.split():
            lit = int(token)
            if lit == 0:
                clauses.append(current)
                current = []
            elif abs(lit) > num_vars:
                raise ValueError(f"line {number}: literal {lit} exceeds {num_vars} variables")
            else:
                current.append(lit)
    if num_vars is None:
        raise ValueError("missing 'p cnf' header")
    if current:
        raise ValueError("last clause is not terminated by 0")
    if declared != len(clauses):
        logger.warning("Header declares %d clauses, found %d", declared, len(clauses))
    return Cnf(num_vars, clauses)


class DpllSolver:
    """Iterative DPLL over a clause list; decisions try the false phase first."""

    def __init__(self, cnf: Cnf):
        self.num_vars = cnf.num_vars
        self._assignment: Dict[int, bool] = {}
        self._trail: List[int] = []
        self._qhead = 0
        # (trail index, decided literal, already flipped)
        self._levels = []
        self._clauses: List[List[int]] = []
        self._search: List[int] = []
        self._units: List[int] = []
        self._watches: Dict[int, List[int]] = {}
        self._empty = False
        variables = set()
        for raw in cnf.clauses:
            clause = list(dict.fromkeys(raw))
            if any(-lit in clause for lit in clause):
                continue
            if not clause:
                self._empty = True
                continue
            variables.update(abs(lit) for lit in clause)
            if len(clause) == 1:
                self._units.append(clause[0])
                continue
            index = len(self._clauses)
            self._clauses.append(clause)
            self._search.append(2)
            self._watches.setdefault(clause[0], []).append(index)
            self._watches.setdefault(clause[1], []).append(index)
        self._order = sorted(variables)
        self._cursor = 0
        self.decisions = 0

    def _value(self, lit: int) -> Optional[bool]:
        value = self._assignment.get(abs(lit))
        if value is None:
            return None
        return value if lit > 0 else not value

    def _assign(self, lit: int):
        self._assignment[abs(lit)] = lit > 0
        self._trail.append(lit)

    def _undo(self, start: int):
        for lit in self._trail[start:]:
            del self._assignment[abs(lit)]
        del self._trail[start:]
        self._qhead = min(self._qhead, start)
        self._cursor = 0

    def _propagate(self) -> bool:
        """Unit-propagate every pending trail literal; False on conflict."""
        while self._qhead < len(self._trail):
            false_lit = -self._trail[self._qhead]
            self._qhead += 1
            watchers = self._watches.get(false_lit, [])
            kept = []
            conflict = False
            for position, index in enumerate(watchers):
                clause = self._clauses[index]
                if clause[0] == false_lit:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                if self._value(first) is True:
                    kept.append(index)
                    continue
                # circular search from the last replacement keeps long clauses linear
                rest = len(clause) - 2
                start = self._search[index]
                for step in range(rest):
                    k = 2 + (start - 2 + step) % rest
                    if self._value(clause[k]) is not False:
                        clause[1], clause[k] = clause[k], clause[1]
                        self._search[index] = k
                        self._watches.setdefault(clause[1], []).append(index)
                        break
                else:
                    kept.append(index)
                    if self._value(first) is False:
                        kept.extend(watchers[position + 1:])
                        conflict = True
                        break
                    self._assign(first)
            self._watches[false_lit] = kept
            if conflict:
                return False
        return True

    def _backtrack(self) -> bool:
        while self._levels:
            start, lit, flipped = self._levels.pop()
            self._undo(start)
            if not flipped:
                self._levels.append((start, -lit, True))
                self._assign(-lit)
                return True
        return False

    def _next_variable(self) -> Optional[int]:
        while self._cursor < len(self._order):
            var = self._order[self._cursor]
            if var not in self._assignment:
                return var
            self._cursor += 1
        return None

    def solve(self) -> SatResult:
        if self._empty:
            return SatResult(False, {})
        for lit in self._units:
            value = self._value(lit)
            if value is False:
                return SatResult(False, {})
            if value is None:
                self._assign(lit)
        if not self._propagate():
            return SatResult(False, {})
        while True:
            var = self._next_variable()
            if var is None:
                model = dict(sorted(self._assignment.items()))
                logger.debug("SAT after %d decisions", self.decisions)
                return SatResult(True, model)
            self.decisions += 1
            self._levels.append((len(self._trail), -var, False))
            self._assign(-var)
            while not self._propagate():
                if not self._backtrack():
                    logger.debug("UNSAT after %d decisions", self.decisions)
                    return SatResult(False, {})


def dpll(cnf: Cnf) -> SatResult:
    return DpllSolver(cnf).solve()


_SYMBOL_INDEX = re.compile(r"(\d+)$")


def _solve_with_sympy(cnf: Cnf, text: str) -> SatResult:
    from sympy.logic.algorithms.dpll import dpll_satisfiable
    from sympy.logic.utilities.dimacs import load

    if any(not clause for clause in cnf.clauses):
        return SatResult(False, {})
    if not cnf.clauses:
        return SatResult(True, {})
    result = dpll_satisfiable(load(text))
    if result is False:
        return SatResult(False, {})
    model = {}
    for symbol, value in result.items():
        match = _SYMBOL_INDEX.search(str(symbol))
        if match:
            model[int(match.group(1))] = bool(value)
    return SatResult(True, model)


def solve_dimacs(text: str, solver: str = "builtin") -> SatResult:
    """Decide a DIMACS formula with the built-in DPLL or sympy."""
    cnf = parse_dimacs(text)
    if solver == "builtin":
        return dpll(cnf)
    if solver == "sympy":
        return _solve_with_sympy(cnf, text)
    raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVERS}")
