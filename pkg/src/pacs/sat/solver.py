"""Small DPLL solver with two watched literals.

Sized for the problems the engine sees (tens of atoms plus Tseitin
auxiliaries). No clause learning: for these sizes propagation plus
chronological backtracking is fast enough and much easier to trust.
A ``Solver`` instance is not thread-safe; build one per call.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, List, Optional, Sequence


def _w(lit: int) -> int:
    return 2 * lit if lit > 0 else -2 * lit + 1


class Solver:
    def __init__(self, num_vars: int, clauses: Iterable[Sequence[int]], priority: Iterable[int] = ()):
        self.num_vars = num_vars
        self.value = [0] * (num_vars + 1)
        self.trail: List[int] = []
        self.watches: List[List[int]] = [[] for _ in range(2 * num_vars + 2)]
        self.clauses: List[List[int]] = []
        self.ok = True
        units = []
        occurrences: Counter = Counter()
        for raw in clauses:
            lits = list(dict.fromkeys(raw))
            seen = set(lits)
            if any(-lit in seen for lit in lits):
                continue
            for lit in lits:
                if not 0 < abs(lit) <= num_vars:
                    raise ValueError(f"literal {lit} out of range 1..{num_vars}")
                occurrences[abs(lit)] += 1
            if not lits:
                self.ok = False
            elif len(lits) == 1:
                units.append(lits[0])
            else:
                idx = len(self.clauses)
                self.clauses.append(lits)
                self.watches[_w(lits[0])].append(idx)
                self.watches[_w(lits[1])].append(idx)
        # decisions: priority vars first, then everything else by occurrence
        prio = list(dict.fromkeys(priority))
        prio_set = set(prio)
        prio.sort(key=lambda v: -occurrences[v])
        rest = sorted((v for v in range(1, num_vars + 1) if v not in prio_set), key=lambda v: -occurrences[v])
        self.order = prio + rest
        if self.ok:
            for u in units:
                if not self._assign(u):
                    self.ok = False
                    break
            if self.ok and not self._propagate(0):
                self.ok = False
        self.root = len(self.trail)

    # -- primitives -------------------------------------------------------
    def lit_value(self, lit: int) -> int:
        v = self.value[abs(lit)]
        return v if lit > 0 else -v

    def _assign(self, lit: int) -> bool:
        v = self.value[abs(lit)]
        if v:
            return (v > 0) == (lit > 0)
        self.value[abs(lit)] = 1 if lit > 0 else -1
        self.trail.append(lit)
        return True

    def _backtrack(self, pos: int) -> None:
        value = self.value
        for lit in self.trail[pos:]:
            value[abs(lit)] = 0
        del self.trail[pos:]

    def _propagate(self, head: int) -> bool:
        value, trail, clauses, watches = self.value, self.trail, self.clauses, self.watches
        while head < len(trail):
            false_lit = -trail[head]
            head += 1
            wl = watches[_w(false_lit)]
            i = j = 0
            n = len(wl)
            while i < n:
                ci = wl[i]
                i += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                v = value[abs(first)]
                fv = v if first > 0 else -v
                if fv == 1:
                    wl[j] = ci
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lit = c[k]
                    v = value[abs(lit)]
                    if (v if lit > 0 else -v) != -1:
                        c[1], c[k] = lit, false_lit
                        watches[_w(lit)].append(ci)
                        break
                else:
                    wl[j] = ci
                    j += 1
                    if fv == -1:
                        while i < n:
                            wl[j] = wl[i]
                            j += 1
                            i += 1
                        del wl[j:]
                        return False
                    value[abs(first)] = 1 if first > 0 else -1
                    trail.append(first)
            del wl[j:]
        return True

    def _pick(self, candidates: Sequence[int]) -> int:
        value = self.value
        for v in candidates:
            if not value[v]:
                return v
        return 0

    def _dpll(self, base: int) -> bool:
        """Extend the current trail to a full model; on failure restore ``base``."""
        stack = []
        while True:
            var = self._pick(self.order)
            if not var:
                return True
            pos = len(self.trail)
            stack.append([pos, var, False])
            self._assign(var)
            while not self._propagate(pos):
                while stack and stack[-1][2]:
                    stack.pop()
                if not stack:
                    self._backtrack(base)
                    return False
                entry = stack[-1]
                pos = entry[0]
                self._backtrack(pos)
                entry[2] = True
                self._assign(-entry[1])

    # -- public -----------------------------------------------------------
    def solve(self, assumptions: Iterable[int] = ()) -> Optional[List[bool]]:
        """Return a model as ``[None, v1, v2, ...]`` or ``None`` if UNSAT.

        The solver is left in its root state afterwards, so repeated calls
        with different assumptions are fine.
        """
        if not self.ok:
            return None
        base = len(self.trail)
        for a in assumptions:
            if not self._assign(a):
                self._backtrack(base)
                return None
        if not self._propagate(base) or not self._dpll(base):
            self._backtrack(base)
            return None
        model = [None] + [self.value[v] > 0 for v in range(1, self.num_vars + 1)]
        self._backtrack(base)
        return model

    def _all_satisfied(self) -> bool:
        value = self.value
        for c in self.clauses:
            for lit in c:
                v = value[abs(lit)]
                if (v if lit > 0 else -v) == 1:
                    break
            else:
                return False
        return True

    def count_projected(self, projection: Sequence[int]) -> int:
        """Number of assignments to ``projection`` that extend to a model.

        Branches only on projection variables; a node where every clause is
        already satisfied contributes ``2**free`` at once.
        """
        if not self.ok:
            return 0
        wanted = set(projection)
        order = [v for v in self.order if v in wanted]

        def count() -> int:
            if self._all_satisfied():
                free = sum(1 for v in order if not self.value[v])
                return 1 << free
            var = self._pick(order)
            if not var:
                pos = len(self.trail)
                if self._dpll(pos):
                    self._backtrack(pos)
                    return 1
                return 0
            total = 0
            for lit in (var, -var):
                pos = len(self.trail)
                self._assign(lit)
                if self._propagate(pos):
                    total += count()
                self._backtrack(pos)
            return total

        return count()


def solve_dimacs(text: str) -> Optional[List[bool]]:
    """Convenience for debugging: solve a DIMACS CNF string."""
    num_vars, clauses, current = 0, [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            num_vars = int(line.split()[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                current.append(lit)
    return Solver(num_vars, clauses).solve()
