"""All-roots solver: linear-product start systems and gamma-trick path tracking.

Tracking runs in multi-projective coordinates. Every non-homogeneous variable
group ``j`` gets an extra homogenizing coordinate ``h_j`` and one random affine
patch ``p_j . Z_j = 1``, so paths diverging to infinity stay bounded and end
with ``h_j -> 0``.

Each path is tracked by a compiled kernel on its own private state, so the
outcome of a path never depends on chunking or threading.
"""

from __future__ import annotations

import enum
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .algebra import CompiledSystem, PolynomialSystem
from .counting import DegreeTable, Structure, degree_table, multihom_bezout, pf_structure


class StartSystemError(RuntimeError):
    """Random start system stayed degenerate after the retry budget."""


class PathStatus(str, enum.Enum):
    FINITE = "finite"
    AT_INFINITY = "at_infinity"
    FAILED = "failed"


@dataclass(frozen=True)
class TrackerConfig:
    seed: int = 0
    corrector_tol: float = 1e-10
    max_newton_iters: int = 3
    initial_step: float = 0.05
    min_step: float = 1e-14
    endpoint_tol: float = 1e-12
    infinity_threshold: float = 1e-8
    cluster_tol: float = 1e-6
    max_step: float = 0.1
    endgame_start: float = 0.1
    final_t: float = 1e-12
    max_steps: int = 20000
    polish_iters: int = 25
    singular_tol: float = 1e-8
    threads: int = 1
    chunk_size: int = 2048

    def __post_init__(self):
        for name in ("corrector_tol", "initial_step", "min_step", "endpoint_tol",
                     "infinity_threshold", "cluster_tol", "max_step", "final_t"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.min_step < self.initial_step:
            raise ValueError("min_step must be smaller than initial_step")
        if self.max_newton_iters < 1 or self.threads < 1 or self.chunk_size < 1:
            raise ValueError("max_newton_iters, threads and chunk_size must be >= 1")


@dataclass
class StartSystem:
    """Linear-product start system in homogeneous coordinates.

    ``factors[i]`` lists ``(group, coeffs)`` linear forms whose product is start
    equation ``i``; ``coeffs`` acts on that group's homogeneous coordinates.
    """

    degree_table: DegreeTable
    coords: tuple[tuple[int, ...], ...]  # homogeneous coordinate indices per group
    homog_index: tuple[int | None, ...]  # index of h_j, None for homogeneous groups
    var_index: tuple[tuple[int, ...], ...]  # original variable -> coordinate, per group
    factors: list[list[tuple[int, np.ndarray]]]
    patch: np.ndarray  # (k, N)
    start_points: np.ndarray  # (n_paths, N)
    selections: list[tuple[tuple[int, int], ...]]
    groups: tuple[tuple[int, ...], ...]  # original variable indices per group

    @property
    def n_coords(self) -> int:
        return self.patch.shape[1]

    def linear_form_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """Padded ``(n, D, N)`` factor coefficients and ``(n, D)`` constants (1 marks padding)."""
        n = len(self.factors)
        D = max(1, max(len(f) for f in self.factors))
        L = np.zeros((n, D, self.n_coords), dtype=complex)
        const = np.zeros((n, D), dtype=complex)
        for i, facs in enumerate(self.factors):
            for r, (j, c) in enumerate(facs):
                L[i, r, list(self.coords[j])] = c
            const[i, len(facs):] = 1.0
        return L, const

    def residuals(self) -> np.ndarray:
        L, const = self.linear_form_matrix()
        vals = (self.start_points[:, None, None, :] * L[None]).sum(-1) + const
        g = np.abs(vals.prod(axis=2)).max(axis=1)
        p = np.abs((self.start_points[:, None, :] * self.patch[None]).sum(-1) - 1.0).max(axis=1)
        return np.maximum(g, p)


def _complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2.0)


def _layout(dt: DegreeTable, structure: Structure):
    coords, homog, var_index = [], [], []
    nxt = 0
    for j, g in enumerate(structure.groups):
        if dt.homogeneous[j]:
            h = None
            idx = tuple(range(nxt, nxt + len(g)))
            nxt += len(g)
            vmap = idx
        else:
            h = nxt
            idx = tuple(range(nxt, nxt + len(g) + 1))
            nxt += len(g) + 1
            vmap = idx[1:]
        coords.append(idx)
        homog.append(h)
        var_index.append(vmap)
    return tuple(coords), tuple(homog), tuple(var_index), nxt


def _selections(dt: DegreeTable, a):
    """All ways to give each equation one (group, factor) so group j is used a_j times."""
    n, k = dt.n_rows, dt.n_groups
    out = []
    choice = []
    remaining = list(a)

    def rec(i):
        if i == n:
            out.append(tuple(choice))
            return
        for j in range(k):
            if remaining[j] and dt.d[i][j]:
                remaining[j] -= 1
                for r in range(dt.d[i][j]):
                    choice.append((j, r))
                    rec(i + 1)
                    choice.pop()
                remaining[j] += 1

    rec(0)
    return out


def build_start_system(dt: DegreeTable, rng, structure: Structure | None = None,
                       max_retries: int = 10, cond_limit: float = 1e10) -> StartSystem:
    """Random multi-homogeneous linear-product start system and all its roots.

    ``rng`` is a seed or a ``numpy.random.Generator`` (PCG64).
    """
    a = dt.a
    if sum(a) != dt.n_rows:
        raise ValueError(f"sum of group dimensions {sum(a)} != number of equations {dt.n_rows}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    if structure is None:
        # groups are only needed for the coordinate layout; sizes suffice
        start = 0
        groups = []
        for s in dt.group_sizes:
            groups.append(tuple(range(start, start + s)))
            start += s
        structure = Structure(tuple(groups))
    coords, homog, var_index, N = _layout(dt, structure)
    sels = _selections(dt, a)

    for _ in range(max_retries):
        factors = []
        for i in range(dt.n_rows):
            facs = []
            for j in range(dt.n_groups):
                for _r in range(dt.d[i][j]):
                    facs.append((j, _complex_normal(rng, len(coords[j]))))
            factors.append(facs)
        patch = np.zeros((dt.n_groups, N), dtype=complex)
        for j in range(dt.n_groups):
            patch[j, list(coords[j])] = _complex_normal(rng, len(coords[j]))

        offset = [[0] * dt.n_groups for _ in range(dt.n_rows)]
        for i in range(dt.n_rows):
            pos = 0
            for j in range(dt.n_groups):
                offset[i][j] = pos
                pos += dt.d[i][j]

        points = np.zeros((len(sels), N), dtype=complex)
        ok = True
        for j in range(dt.n_groups):
            size = len(coords[j])
            mats = np.zeros((len(sels), size, size), dtype=complex)
            rhs = np.zeros((len(sels), size), dtype=complex)
            rhs[:, -1] = 1.0
            mats[:, -1, :] = patch[j, list(coords[j])]
            for s, sel in enumerate(sels):
                row = 0
                for i, (jj, r) in enumerate(sel):
                    if jj == j:
                        mats[s, row] = factors[i][offset[i][j] + r][1]
                        row += 1
            if len(sels) == 0:
                continue
            if np.max(np.linalg.cond(mats)) > cond_limit:
                ok = False
                break
            points[:, list(coords[j])] = np.linalg.solve(mats, rhs[..., None])[..., 0]
        if ok:
            return StartSystem(dt, coords, homog, var_index, factors, patch, points, sels,
                               structure.groups)
    raise StartSystemError(f"start system stayed singular after {max_retries} draws")


@dataclass
class PathResult:
    status: PathStatus
    endpoint: np.ndarray | None
    residual: float
    condition: float
    steps: int
    homogeneous_endpoint: np.ndarray = field(repr=False, default=None)
    t_end: float = 0.0  # where tracking stopped; above final_t only for failed paths


@dataclass
class Solution:
    point: np.ndarray
    multiplicity: int
    singular: bool
    residual: float
    condition: float


@dataclass
class SolutionSet:
    distinct: list[Solution]
    accounting: dict[str, int]
    seed: int
    paths: list[PathResult] = field(repr=False, default_factory=list)
    n_start_points: int = 0
    gamma: complex = 1.0

    @property
    def finite_total(self) -> int:
        return sum(s.multiplicity for s in self.distinct)

    def points(self) -> np.ndarray:
        if not self.distinct:
            return np.zeros((0, 0), dtype=complex)
        return np.array([s.point for s in self.distinct])

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "accounting": dict(self.accounting),
            "solutions": [
                {
                    "point_re": [float(x) for x in s.point.real],
                    "point_im": [float(x) for x in s.point.imag],
                    "multiplicity": int(s.multiplicity),
                    "singular": bool(s.singular),
                    "residual": float(s.residual),
                }
                for s in self.distinct
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _normalized_homog(start: StartSystem, Z: np.ndarray) -> np.ndarray:
    """Per path, smallest ``|h_j| / max|Z_j|`` over non-homogeneous groups."""
    out = np.full(Z.shape[0], np.inf)
    for j, h in enumerate(start.homog_index):
        if h is None:
            continue
        scale = np.abs(Z[:, list(start.coords[j])]).max(axis=1)
        with np.errstate(all="ignore"):
            out = np.minimum(out, np.abs(Z[:, h]) / scale)
    return out


def _dehomogenize(start: StartSystem, Z: np.ndarray, n_vars: int) -> np.ndarray:
    z = np.zeros((Z.shape[0], n_vars), dtype=complex)
    for j, h in enumerate(start.homog_index):
        cols = list(start.var_index[j])
        scale = Z[:, [h]] if h is not None else 1.0
        with np.errstate(all="ignore"):
            vals = Z[:, cols] / scale
        z[:, list(start.groups[j])] = vals
    return z


def homogenize(sys: PolynomialSystem, structure: Structure, dt: DegreeTable, start: StartSystem):
    rows = []
    N = start.n_coords
    for i, p in enumerate(sys.polynomials):
        row = []
        for exps, coef in p.terms:
            e = [0] * N
            for j, g in enumerate(structure.groups):
                gdeg = 0
                for var, coord in zip(g, start.var_index[j]):
                    e[coord] = exps[var]
                    gdeg += exps[var]
                h = start.homog_index[j]
                if h is not None:
                    e[h] = dt.d[i][j] - gdeg
            row.append((tuple(e), coef))
        rows.append(row)
    return CompiledSystem(rows, N)


def _cluster(points: np.ndarray, tol: float) -> list[list[int]]:
    """Single-linkage clusters of rows within ``tol * (1 + |z|_inf)`` (inf-norm)."""
    n = points.shape[0]
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    scale = 1.0 + np.abs(points).max(axis=1) if n else np.zeros(0)
    for i in range(n):
        if i + 1 >= n:
            break
        d = np.abs(points[i + 1:] - points[i]).max(axis=1)
        lim = tol * np.maximum(scale[i + 1:], scale[i])
        for j in np.flatnonzero(d <= lim) + i + 1:
            ri, rj = find(i), find(int(j))
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _lex_key(z: np.ndarray):
    return tuple(v for x in z for v in (float(x.real), float(x.imag)))


def track_all(sys: PolynomialSystem, cfg: TrackerConfig | None = None,
              structure: Structure | None = None) -> SolutionSet:
    """Track every start path of a random linear-product homotopy to the target."""
    cfg = cfg or TrackerConfig()
    if not sys.is_square:
        raise ValueError(
            f"system is not square ({sys.n_equations} equations, {sys.n_vars} variables)"
        )
    if structure is None:
        structure = pf_structure(sys) if sys.group_split else Structure((tuple(range(sys.n_vars)),))
    dt = degree_table(sys, structure)
    rng = np.random.default_rng(cfg.seed)
    start = build_start_system(dt, rng, structure)
    gamma = complex(np.exp(1j * rng.uniform(0.0, 2.0 * math.pi)))

    target = homogenize(sys, structure, dt, start)
    affine = CompiledSystem.from_system(sys)
    L, Lconst = start.linear_form_matrix()

    def run(chunk):
        return _kernels.track_paths(
            np.ascontiguousarray(chunk), gamma, target.coef, target.var, target.exp,
            L, Lconst, start.patch, cfg.corrector_tol, cfg.max_newton_iters,
            cfg.initial_step, cfg.min_step, cfg.max_step, cfg.endgame_start,
            cfg.final_t, cfg.max_steps, cfg.polish_iters,
        )

    P = start.start_points
    chunks = [P[i: i + cfg.chunk_size] for i in range(0, P.shape[0], cfg.chunk_size)]
    if cfg.threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(c) for c in chunks]
    if results:
        Zt = np.concatenate([r[0] for r in results])
        Zp = np.concatenate([r[1] for r in results])
        ok = np.concatenate([r[2] for r in results]) == _kernels.OK
        steps = np.concatenate([r[3] for r in results])
        t_end = np.concatenate([r[5] for r in results])
    else:
        Zt = Zp = np.zeros((0, start.n_coords), dtype=complex)
        ok = np.zeros(0, dtype=bool)
        steps = np.zeros(0, dtype=int)
        t_end = np.zeros(0)

    paths = _classify(sys, start, affine, Zt, Zp, ok, steps, t_end, cfg)
    return _collect(paths, cfg, start.start_points.shape[0], gamma)


def _classify(sys, start, affine, Zt, Zp, ok, steps, t_end, cfg) -> list[PathResult]:
    # divergence is judged on the tracked point at final_t; Newton at t=0 is
    # ill-posed on the singular set at infinity and may wander off it
    n = sys.n_vars
    hn = _normalized_homog(start, Zt)
    coef_scale = 1.0 + sys.max_coefficient()
    candidate = ok & np.isfinite(Zt).all(axis=1) & (hn > cfg.infinity_threshold)
    res = np.full(Zt.shape[0], np.inf)
    cond = np.zeros(Zt.shape[0])
    z = np.full((Zt.shape[0], n), np.nan, dtype=complex)
    Z = Zt.copy()
    if candidate.any():
        idx = np.flatnonzero(candidate)
        best_res = np.full(idx.size, np.inf)
        for H in (Zt, Zp):
            Hc = H[idx]
            with np.errstate(all="ignore"):
                zc = _dehomogenize(start, Hc, n)
            good = np.isfinite(zc).all(axis=1)
            r = np.full(idx.size, np.inf)
            if good.any():
                r[good] = np.abs(affine.evaluate(zc[good])).max(axis=1)
            better = r < best_res
            best_res[better] = r[better]
            z[idx[better]] = zc[better]
            Z[idx[better]] = Hc[better]
        res[idx] = best_res
        fin = np.isfinite(best_res)
        if fin.any():
            _, J = affine.evaluate_with_jacobian(z[idx[fin]])
            with np.errstate(all="ignore"):
                cond[idx[fin]] = np.linalg.svd(J, compute_uv=False)[:, -1]
    paths = []
    for b in range(Zt.shape[0]):
        if not ok[b] or not np.isfinite(Zt[b]).all():
            status = PathStatus.FAILED
        elif hn[b] <= cfg.infinity_threshold:
            status = PathStatus.AT_INFINITY
        elif res[b] <= cfg.endpoint_tol * coef_scale * _magnitude_scale(z[b]):
            status = PathStatus.FINITE
        else:
            status = PathStatus.FAILED
        endpoint = z[b] if status is PathStatus.FINITE else None
        paths.append(PathResult(status, endpoint, float(res[b]), float(cond[b]), int(steps[b]),
                                Z[b], float(t_end[b])))
    return paths


def _magnitude_scale(z: np.ndarray) -> float:
    # floating-point evaluation error of a bilinear term grows like |z|^2
    m = float(np.abs(z).max()) if z.size else 0.0
    return max(1.0, m) ** 2


def _collect(paths: list[PathResult], cfg: TrackerConfig, n_start: int, gamma) -> SolutionSet:
    finite = [p for p in paths if p.status is PathStatus.FINITE]
    finite.sort(key=lambda p: _lex_key(p.endpoint))
    distinct = []
    if finite:
        pts = np.array([p.endpoint for p in finite])
        for members in _cluster(pts, cfg.cluster_tol):
            best = min(members, key=lambda m: (finite[m].residual, m))
            rep = finite[best]
            mult = len(members)
            cond = min(finite[m].condition for m in members)
            distinct.append(
                Solution(rep.endpoint.copy(), mult, bool(mult > 1 or cond < cfg.singular_tol),
                         rep.residual, cond)
            )
    distinct.sort(key=lambda s: _lex_key(s.point))
    accounting = {
        "paths": n_start,
        "finite": len(finite),
        "at_infinity": sum(p.status is PathStatus.AT_INFINITY for p in paths),
        "failed": sum(p.status is PathStatus.FAILED for p in paths),
        "distinct": len(distinct),
    }
    return SolutionSet(distinct, accounting, cfg.seed, paths, n_start, gamma)


@dataclass
class CompletenessReport:
    bound: int
    finite_total: int
    at_infinity: int
    failed: int
    paths: int
    accounted: bool
    certified: bool
    singular: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def summary(self) -> str:
        state = "certified complete" if self.certified else "not certified"
        text = (
            f"{state}: finite={self.finite_total} at_infinity={self.at_infinity} "
            f"failed={self.failed} bound={self.bound}"
        )
        if self.singular:
            text += (f"; {self.singular} singular solutions, the solution set may be "
                     "positive-dimensional there")
        return text


def verify_count(sol: SolutionSet, bound: int) -> CompletenessReport:
    acc = sol.accounting
    total = sol.finite_total + acc["at_infinity"] + acc["failed"]
    accounted = total == bound
    return CompletenessReport(
        bound=int(bound),
        finite_total=sol.finite_total,
        at_infinity=acc["at_infinity"],
        failed=acc["failed"],
        paths=acc["paths"],
        accounted=accounted,
        certified=accounted and acc["failed"] == 0,
        singular=sum(1 for s in sol.distinct if s.singular),
    )


def expected_paths(sys: PolynomialSystem, structure: Structure | None = None) -> int:
    structure = structure or pf_structure(sys)
    return multihom_bezout(degree_table(sys, structure))


def with_seed(cfg: TrackerConfig, seed: int) -> TrackerConfig:
    return replace(cfg, seed=seed)
