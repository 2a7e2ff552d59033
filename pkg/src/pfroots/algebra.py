"""Sparse polynomial systems and the bilinear (V, U) algebraization of power flow.

Conjugate voltages are replaced by independent unknowns ``u_n``; a physical
steady state is an algebraic solution with ``u = conj(v)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse

from .netmodel import Network, build_admittance


@dataclass(frozen=True)
class Polynomial:
    """Sparse polynomial: ``terms`` maps exponent tuples to nonzero complex coefficients."""

    terms: tuple[tuple[tuple[int, ...], complex], ...]
    n_vars: int

    @classmethod
    def from_terms(cls, n_vars: int, terms) -> "Polynomial":
        acc: dict[tuple[int, ...], complex] = {}
        for exps, coef in terms:
            exps = tuple(int(e) for e in exps)
            if len(exps) != n_vars:
                raise ValueError(f"monomial {exps} has {len(exps)} exponents, expected {n_vars}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            acc[exps] = acc.get(exps, 0j) + complex(coef)
        kept = tuple((e, c) for e, c in sorted(acc.items()) if c != 0)
        return cls(kept, n_vars)

    @property
    def support(self) -> list[tuple[int, ...]]:
        return [e for e, _ in self.terms]

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for _, c in self.terms], dtype=complex)

    def total_degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def __call__(self, z) -> complex:
        total = 0j
        for exps, coef in self.terms:
            val = coef
            for zi, e in zip(z, exps):
                if e:
                    val *= zi**e
            total += val
        return total


@dataclass(frozen=True)
class PolynomialSystem:
    variables: tuple[str, ...]
    polynomials: tuple[Polynomial, ...]
    group_split: tuple[tuple[int, ...], ...] = ()

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_equations(self) -> int:
        return len(self.polynomials)

    @property
    def is_square(self) -> bool:
        return self.n_vars == self.n_equations

    def max_coefficient(self) -> float:
        return max((abs(c) for p in self.polynomials for _, c in p.terms), default=0.0)


def system_from_terms(variables: Sequence[str], rows, group_split=()) -> PolynomialSystem:
    n = len(variables)
    polys = tuple(Polynomial.from_terms(n, r) for r in rows)
    return PolynomialSystem(tuple(variables), polys, tuple(tuple(g) for g in group_split))


def _check_point(sys: PolynomialSystem, point) -> np.ndarray:
    z = np.asarray(point, dtype=complex)
    if z.shape != (sys.n_vars,):
        raise ValueError(f"point has shape {z.shape}, system has {sys.n_vars} variables")
    return z


def evaluate(sys: PolynomialSystem, point) -> np.ndarray:
    """Residual vector ``f(point)``, summed term by term."""
    z = _check_point(sys, point)
    return np.array([p(z) for p in sys.polynomials], dtype=complex)


def jacobian(sys: PolynomialSystem, point) -> np.ndarray:
    """Exact Jacobian by term-wise differentiation."""
    z = _check_point(sys, point)
    J = np.zeros((sys.n_equations, sys.n_vars), dtype=complex)
    for i, p in enumerate(sys.polynomials):
        for exps, coef in p.terms:
            for j, e in enumerate(exps):
                if e == 0:
                    continue
                val = coef * e
                for l, el in enumerate(exps):
                    if l == j:
                        if e > 1:
                            val *= z[l] ** (e - 1)
                    elif el:
                        val *= z[l] ** el
                J[i, j] += val
    return J


def algebraize(net: Network) -> PolynomialSystem:
    """Bilinear power-flow system in ``(v_1..v_{n-1}, u_1..u_{n-1})``.

    For each PQ bus ``n`` with ``A = v_n sum_k conj(Y_nk) u_k`` and
    ``B = u_n sum_k Y_nk v_k`` (so ``A = S_n`` and ``B = conj(S_n)`` on real
    solutions) the rows are ``A + B - 2 P_n`` and ``A - B - 2i Q_n``. The slack
    values ``v_0 = u_0 = |V_0|`` are substituted as constants.
    """
    Y = build_admittance(net)
    n = net.n_buses
    m = n - 1
    v0 = net.slack.v_magnitude
    s_inj = net.injections()

    def vidx(k):
        return k - 1

    def uidx(k):
        return m + k - 1

    rows = []
    for bus in range(1, n):
        a_terms = []  # A = v_n sum_k conj(Y_nk) u_k
        b_terms = []  # B = u_n sum_k Y_nk v_k
        for k in range(n):
            if Y[bus, k] == 0:
                continue
            ea = [0] * (2 * m)
            eb = [0] * (2 * m)
            ea[vidx(bus)] += 1
            eb[uidx(bus)] += 1
            ca = np.conj(Y[bus, k])
            cb = Y[bus, k]
            if k == 0:
                ca *= v0
                cb *= v0
            else:
                ea[uidx(k)] += 1
                eb[vidx(k)] += 1
            a_terms.append((tuple(ea), ca))
            b_terms.append((tuple(eb), cb))
        const = (0,) * (2 * m)
        p_row = a_terms + b_terms + [(const, -2.0 * s_inj[bus].real)]
        q_row = a_terms + [(e, -c) for e, c in b_terms] + [(const, -2j * s_inj[bus].imag)]
        rows.append(p_row)
        rows.append(q_row)

    names = [f"v{k}" for k in range(1, n)] + [f"u{k}" for k in range(1, n)]
    groups = (tuple(range(m)), tuple(range(m, 2 * m)))
    return system_from_terms(names, rows, groups)


def split_point(point) -> tuple[np.ndarray, np.ndarray]:
    """Split an algebraic point into its ``v`` and ``u`` halves."""
    z = np.asarray(point, dtype=complex)
    m = z.size // 2
    return z[:m], z[m:]


def swap_conjugate(point) -> np.ndarray:
    """The involution ``(v, u) -> (conj(u), conj(v))``."""
    v, u = split_point(point)
    return np.concatenate([np.conj(u), np.conj(v)])


def _fmt(c: complex) -> str:
    return f"({c.real!r} + {c.imag!r}*I)"


def to_bertini(sys: PolynomialSystem) -> str:
    """Bertini-style input text, one ``variable_group`` line per group."""
    groups = sys.group_split or (tuple(range(sys.n_vars)),)
    lines = ["INPUT"]
    for g in groups:
        lines.append("variable_group " + ", ".join(sys.variables[i] for i in g) + ";")
    fnames = [f"f{i + 1}" for i in range(sys.n_equations)]
    lines.append("function " + ", ".join(fnames) + ";")
    for name, p in zip(fnames, sys.polynomials):
        parts = []
        for exps, coef in p.terms:
            factors = [_fmt(coef)]
            for v, e in zip(sys.variables, exps):
                if e == 1:
                    factors.append(v)
                elif e > 1:
                    factors.append(f"{v}^{e}")
            parts.append("*".join(factors))
        lines.append(f"{name} = " + (" + ".join(parts) if parts else "0") + ";")
    lines.append("END;")
    return "\n".join(lines) + "\n"


class CompiledSystem:
    """Vectorized evaluator for a batch of points.

    Every term is stored as a short list of ``(variable, exponent)`` factors,
    padded per row, so evaluation of ``B`` points costs a handful of gathers.
    Rows of the output depend only on the matching input row, which keeps
    tracking results independent of how paths are batched.
    """

    def __init__(self, rows: Sequence[Sequence[tuple[Sequence[int], complex]]], n_vars: int):
        self.n_vars = n_vars
        self.n_rows = len(rows)
        sparse_rows = []
        max_terms = 1
        max_factors = 1
        max_exp = 1
        for row in rows:
            terms = []
            for exps, coef in row:
                facs = [(j, int(e)) for j, e in enumerate(exps) if e]
                max_factors = max(max_factors, len(facs))
                max_exp = max([max_exp] + [e for _, e in facs])
                terms.append((complex(coef), facs))
            max_terms = max(max_terms, len(terms))
            sparse_rows.append(terms)

        R, T, F = self.n_rows, max_terms, max_factors
        self.coef = np.zeros((R, T), dtype=complex)
        # padded factors point at variable 0 with exponent 0 (value 1)
        self.var = np.zeros((R, T, F), dtype=np.intp)
        self.exp = np.zeros((R, T, F), dtype=np.intp)
        for r, terms in enumerate(sparse_rows):
            for t, (c, facs) in enumerate(terms):
                self.coef[r, t] = c
                for f, (j, e) in enumerate(facs):
                    self.var[r, t, f] = j
                    self.exp[r, t, f] = e
        self.max_exp = max_exp
        self.shape = (R, T, F)

        # one sparse column-scatter: (row, term, factor) contribution -> Jacobian slot
        r_idx, t_idx, f_idx = np.nonzero(self.exp)
        self._valid = (r_idx, t_idx, f_idx)
        cols = r_idx * n_vars + self.var[r_idx, t_idx, f_idx]
        self._scatter = sparse.csr_matrix(
            (np.ones(cols.size), (np.arange(cols.size), cols)), shape=(cols.size, R * n_vars)
        )

    @classmethod
    def from_system(cls, sys: PolynomialSystem) -> "CompiledSystem":
        return cls([p.terms for p in sys.polynomials], sys.n_vars)

    def _powers(self, Z: np.ndarray) -> np.ndarray:
        B = Z.shape[0]
        P = np.empty((B, self.n_vars, self.max_exp + 1), dtype=complex)
        P[:, :, 0] = 1.0
        for e in range(1, self.max_exp + 1):
            P[:, :, e] = P[:, :, e - 1] * Z
        return P

    def evaluate(self, Z: np.ndarray) -> np.ndarray:
        Z = np.atleast_2d(Z)
        P = self._powers(Z)
        fac = P[:, self.var, self.exp]  # (B, R, T, F)
        mono = fac.prod(axis=3)
        return (mono * self.coef).sum(axis=2)

    def evaluate_with_jacobian(self, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        Z = np.atleast_2d(Z)
        B = Z.shape[0]
        R, T, F = self.shape
        P = self._powers(Z)
        fac = P[:, self.var, self.exp]
        vals = (fac.prod(axis=3) * self.coef).sum(axis=2)
        # product of all factors except f, via prefix/suffix products
        prefix = np.ones((B, R, T, F), dtype=complex)
        suffix = np.ones((B, R, T, F), dtype=complex)
        for f in range(1, F):
            prefix[..., f] = prefix[..., f - 1] * fac[..., f - 1]
            suffix[..., F - 1 - f] = suffix[..., F - f] * fac[..., F - f]
        r, t, f = self._valid
        e = self.exp[r, t, f]
        dfac = P[:, self.var[r, t, f], e - 1] * e
        contrib = dfac * prefix[:, r, t, f] * suffix[:, r, t, f] * self.coef[r, t]
        J = (self._scatter.T @ contrib.T).T
        return vals, np.ascontiguousarray(J).reshape(B, R, self.n_vars)
