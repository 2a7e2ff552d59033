"""Root counts: classical and multi-homogeneous Bezout numbers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .algebra import PolynomialSystem


@dataclass(frozen=True)
class Structure:
    """A partition of the variable indices into groups."""

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(tuple(int(i) for i in g) for g in self.groups))

    def validate(self, n_vars: int) -> None:
        if any(len(g) == 0 for g in self.groups):
            raise ValueError("structure has an empty group")
        flat = [i for g in self.groups for i in g]
        if len(flat) != len(set(flat)):
            raise ValueError("structure groups overlap")
        if sorted(flat) != list(range(n_vars)):
            raise ValueError(f"structure does not partition the {n_vars} variables")


@dataclass(frozen=True)
class DegreeTable:
    d: tuple[tuple[int, ...], ...]
    homogeneous: tuple[bool, ...]
    group_sizes: tuple[int, ...]

    @property
    def a(self) -> tuple[int, ...]:
        return tuple(s - int(h) for s, h in zip(self.group_sizes, self.homogeneous))

    @property
    def n_rows(self) -> int:
        return len(self.d)

    @property
    def n_groups(self) -> int:
        return len(self.group_sizes)


def pf_structure(sys: PolynomialSystem) -> Structure:
    """The (v, u) split of an algebraized power-flow system."""
    if not sys.group_split:
        raise ValueError("system carries no group split")
    return Structure(sys.group_split)


def degree_table(sys: PolynomialSystem, s: Structure) -> DegreeTable:
    s.validate(sys.n_vars)
    d = []
    homogeneous = [True] * len(s.groups)
    for p in sys.polynomials:
        row = []
        for j, g in enumerate(s.groups):
            degs = [sum(exps[l] for l in g) for exps in p.support]
            dij = max(degs, default=0)
            if any(x != dij for x in degs):
                homogeneous[j] = False
            row.append(dij)
        d.append(tuple(row))
    return DegreeTable(tuple(d), tuple(homogeneous), tuple(len(g) for g in s.groups))


def classical_bezout(sys: PolynomialSystem) -> int:
    return math.prod(p.total_degree() for p in sys.polynomials)


def multihom_bezout(dt: DegreeTable, a: Sequence[int] | None = None) -> int:
    """Coefficient of ``prod_j zeta_j^{a_j}`` in ``prod_i sum_j d_ij zeta_j``.

    Dynamic programming over partial exponent vectors bounded by ``a``; one
    pass per equation, exact integers.
    """
    a = tuple(dt.a if a is None else a)
    if sum(a) != dt.n_rows:
        raise ValueError(f"sum of group dimensions {sum(a)} != number of equations {dt.n_rows}")
    if any(x < 0 for x in a):
        raise ValueError("negative group dimension")
    k = len(a)
    states: dict[tuple[int, ...], int] = {(0,) * k: 1}
    for row in dt.d:
        nxt: dict[tuple[int, ...], int] = {}
        for e, c in states.items():
            for j in range(k):
                if row[j] and e[j] < a[j]:
                    e2 = e[:j] + (e[j] + 1,) + e[j + 1:]
                    nxt[e2] = nxt.get(e2, 0) + c * row[j]
        states = nxt
    return states.get(a, 0)


def multinomial(n: int, parts: Sequence[int]) -> int:
    if sum(parts) != n or any(p < 0 for p in parts):
        raise ValueError("parts must be nonnegative and sum to n")
    out = 1
    rest = n
    for p in parts:
        out *= math.comb(rest, p)
        rest -= p
    return out


def multinomial_bezout(a: Sequence[int], d: Sequence[int]) -> int:
    """Closed form for identical supports: ``multinomial(n; a) * prod d_j^a_j``."""
    if len(a) != len(d):
        raise ValueError("a and d must have the same length")
    n = sum(a)
    return multinomial(n, a) * math.prod(dj**aj for dj, aj in zip(d, a))


def theorem1_bound(n_buses: int) -> int:
    """Upper bound ``C(2n-2, n-1)`` on the number of complex power-flow solutions."""
    if n_buses < 2:
        raise ValueError("need at least two buses")
    return math.comb(2 * n_buses - 2, n_buses - 1)


def classical_pf_bound(n_buses: int) -> int:
    """Bezout number ``4^(n-1)`` of the quadratic power-flow system."""
    if n_buses < 2:
        raise ValueError("need at least two buses")
    return 4 ** (n_buses - 1)
