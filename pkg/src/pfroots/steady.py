"""Real steady states: realness filter, flows, objectives and instance summaries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import split_point, swap_conjugate
from .homotopy import SolutionSet
from .netmodel import Network, build_admittance


@dataclass(frozen=True)
class SteadyState:
    voltages: np.ndarray
    injections: np.ndarray  # (n, 2) rows of (P, Q)
    branch_flows: dict[tuple[int, int], complex]
    cost: float
    loss_l1: float
    realness: float = 0.0

    @property
    def slack_power(self) -> complex:
        return complex(self.injections[0, 0], self.injections[0, 1])


def realness_gap(point) -> float:
    v, u = split_point(point)
    if v.size == 0:
        return 0.0
    return float(np.max(np.abs(u - np.conj(v)) / (1.0 + np.abs(v))))


def full_voltages(net: Network, point) -> np.ndarray:
    """Bus voltages with the slack constant, from an algebraic point on the real locus."""
    v, u = split_point(point)
    # average v and conj(u) so both halves of the solution contribute
    vals = 0.5 * (v + np.conj(u))
    return np.concatenate([[complex(net.slack.v_magnitude)], vals])


def _check_voltages(net: Network, V) -> np.ndarray:
    V = np.asarray(V, dtype=complex)
    if V.shape != (net.n_buses,):
        raise ValueError(f"voltage vector has shape {V.shape}, network has {net.n_buses} buses")
    return V


def bus_powers(net: Network, V) -> np.ndarray:
    """Complex power injected at each bus as an (n, 2) array of (P, Q)."""
    V = _check_voltages(net, V)
    S = V * np.conj(build_admittance(net) @ V)
    return np.column_stack([S.real, S.imag])


def branch_flows(net: Network, V) -> dict[tuple[int, int], complex]:
    """Sending-end power ``S_lm`` on both directions of every branch."""
    V = _check_voltages(net, V)
    flows = {}
    for br in net.branches:
        y = br.admittance
        for l, m in ((br.from_bus, br.to_bus), (br.to_bus, br.from_bus)):
            current = y * (V[l] - V[m]) + 0.5j * br.b * V[l]
            flows[(l, m)] = complex(V[l] * np.conj(current))
    return flows


def branch_losses(net: Network, flows) -> np.ndarray:
    """Per-branch ``S_lm + S_ml`` in branch order."""
    return np.array([flows[(b.from_bus, b.to_bus)] + flows[(b.to_bus, b.from_bus)]
                     for b in net.branches], dtype=complex)


def cost_of(net: Network, p0: float) -> float:
    c2, c1, c0 = net.cost_coefficients
    return float(c2 * p0 * p0 + c1 * p0 + c0)


def cost(net: Network, st: SteadyState) -> float:
    return cost_of(net, float(st.injections[0, 0]))


def loss(net: Network, st: SteadyState, p: float = 1.0) -> float:
    """``p``-norm of the active-power loss vector over branches."""
    if not p >= 1:
        raise ValueError(f"norm order must be >= 1, got {p}")
    d = np.abs(branch_losses(net, st.branch_flows).real)
    if d.size == 0:
        return 0.0
    if np.isinf(p):
        return float(d.max())
    return float(np.sum(d**p) ** (1.0 / p))


def steady_state(net: Network, V, realness: float = 0.0) -> SteadyState:
    V = _check_voltages(net, V)
    inj = bus_powers(net, V)
    flows = branch_flows(net, V)
    d = branch_losses(net, flows).real
    return SteadyState(V, inj, flows, cost_of(net, float(inj[0, 0])),
                       float(np.abs(d).sum()), realness)


def filter_real(net: Network, sol: SolutionSet, real_tol: float = 1e-6) -> list[SteadyState]:
    out = []
    for s in sol.distinct:
        gap = realness_gap(s.point)
        if gap <= real_tol:
            out.append(steady_state(net, full_voltages(net, s.point), gap))
    return out


@dataclass
class InvolutionReport:
    closed: bool
    unmatched: list[int]
    max_mismatch: float

    def summary(self) -> str:
        if self.closed:
            return "closed under (v, u) -> (conj u, conj v)"
        return f"{len(self.unmatched)} solutions without a partner: {self.unmatched}"


def involution_check(sol: SolutionSet, tol: float = 1e-6) -> InvolutionReport:
    pts = [s.point for s in sol.distinct]
    unmatched = []
    worst = 0.0
    for i, p in enumerate(pts):
        img = swap_conjugate(p)
        scale = 1.0 + np.abs(img).max(initial=0.0)
        best = min((np.abs(q - img).max(initial=0.0) / scale for q in pts), default=np.inf)
        worst = max(worst, float(best))
        if best > tol:
            unmatched.append(i)
    return InvolutionReport(not unmatched, unmatched, worst)


def _n_minimizers(values: list[float], rel_tol: float) -> int:
    if not values:
        return 0
    lo = min(values)
    return sum(1 for x in values if x - lo <= rel_tol * max(1.0, abs(lo)))


@dataclass
class InstanceSummary:
    name: str
    n_buses: int
    n_branches: int
    n_states: int
    cost: tuple[float, float, float] | None
    loss: tuple[float, float, float] | None
    min_cost_count: int
    min_loss_count: int
    treewidth: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.n_states > 0

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "buses": self.n_buses,
            "branches": self.n_branches,
            "treewidth": self.treewidth,
            "solutions": self.n_states,
            "min_cost_count": self.min_cost_count,
            "min_loss_count": self.min_loss_count,
        }
        for key, stats in (("cost", self.cost), ("loss", self.loss)):
            d[key] = None if stats is None else dict(zip(("min", "avg", "max"), stats))
        if not self.feasible:
            d["note"] = "infeasible, no real steady state"
        d.update(self.extra)
        return d


def _stats(values):
    if not values:
        return None
    return (float(min(values)), float(np.mean(values)), float(max(values)))


def summarize(net: Network, states: list[SteadyState], norm: float = 1.0,
              tie_tol: float = 1e-6, treewidth: int | None = None) -> InstanceSummary:
    costs = [st.cost for st in states]
    losses = [loss(net, st, norm) for st in states]
    return InstanceSummary(
        name=net.name,
        n_buses=net.n_buses,
        n_branches=net.n_branches,
        n_states=len(states),
        cost=_stats(costs),
        loss=_stats(losses),
        min_cost_count=_n_minimizers(costs, tie_tol),
        min_loss_count=_n_minimizers(losses, tie_tol),
        treewidth=treewidth,
    )


TABLE_COLUMNS = ("instance", "|N|", "|E|", "tw", "|X|",
                 "min cost", "#min cost", "avg cost", "max cost",
                 "min loss", "#min loss", "avg loss", "max loss")


def format_row(s: InstanceSummary) -> list[str]:
    def f(x):
        return f"{x:.2f}"

    tw = "-" if s.treewidth is None else str(s.treewidth)
    head = [s.name, str(s.n_buses), str(s.n_branches), tw, str(s.n_states)]
    if not s.feasible:
        return head + ["infeasible, no real steady state"]
    cost_min, cost_avg, cost_max = s.cost
    loss_min, loss_avg, loss_max = s.loss
    return head + [f(cost_min), str(s.min_cost_count), f(cost_avg), f(cost_max),
                   f(loss_min), str(s.min_loss_count), f(loss_avg), f(loss_max)]
