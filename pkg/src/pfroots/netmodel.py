"""AC network model: buses, branches, case-file I/O and the nodal admittance matrix.

All quantities are per-unit. Demand is positive, so the complex power injected
at a PQ bus is ``-(p_demand + 1j * q_demand)``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class CaseError(ValueError):
    """Raised for malformed or physically invalid case data."""


class MultipleSlackError(CaseError):
    """More than one slack bus: the solution set is empty or positive-dimensional."""

    def __init__(self, slack_ids):
        self.slack_ids = list(slack_ids)
        super().__init__(
            f"{len(self.slack_ids)} slack buses {self.slack_ids}: with more than one "
            "reference bus the complex solution set is empty or positive-dimensional; "
            "only square single-slack systems are solved"
        )


class BusKind(str, enum.Enum):
    SLACK = "slack"
    PQ = "pq"


@dataclass(frozen=True)
class Bus:
    id: int
    kind: BusKind
    p_demand: float = 0.0
    q_demand: float = 0.0
    v_magnitude: float | None = None

    @property
    def is_slack(self) -> bool:
        return self.kind is BusKind.SLACK


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    r: float
    x: float
    b: float = 0.0

    @property
    def impedance(self) -> complex:
        return complex(self.r, self.x)

    @property
    def admittance(self) -> complex:
        return 1.0 / self.impedance

    @property
    def pair(self) -> frozenset:
        return frozenset((self.from_bus, self.to_bus))


@dataclass(frozen=True)
class Network:
    buses: tuple[Bus, ...]
    branches: tuple[Branch, ...]
    cost_coefficients: tuple[float, float, float] = (0.0, 1.0, 0.0)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(self.buses))
        object.__setattr__(self, "branches", tuple(self.branches))
        object.__setattr__(self, "cost_coefficients", tuple(float(c) for c in self.cost_coefficients))
        _validate(self)

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    @property
    def n_branches(self) -> int:
        return len(self.branches)

    @property
    def slack(self) -> Bus:
        return self.buses[0]

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(br.from_bus, br.to_bus) for br in self.branches]

    def injections(self) -> np.ndarray:
        """Specified complex injections at every bus (slack entry is 0, it is free)."""
        s = np.array([-(b.p_demand + 1j * b.q_demand) for b in self.buses], dtype=complex)
        s[0] = 0.0
        return s


def _validate(net: Network) -> None:
    ids = [b.id for b in net.buses]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})
        raise CaseError(f"duplicate bus id(s) {dup}")
    if sorted(ids) != list(range(len(ids))):
        raise CaseError(f"bus ids must be 0..{len(ids) - 1}, got {sorted(ids)}")
    if [b.id for b in net.buses] != list(range(len(ids))):
        raise CaseError("buses must be listed in id order")

    slacks = [b.id for b in net.buses if b.is_slack]
    if not slacks:
        raise CaseError("no slack bus")
    if len(slacks) > 1:
        raise MultipleSlackError(slacks)
    if slacks[0] != 0:
        raise CaseError(f"slack bus must have id 0, got {slacks[0]}")
    for b in net.buses:
        if b.is_slack:
            if b.v_magnitude is None or not b.v_magnitude > 0:
                raise CaseError("slack bus needs a positive voltage magnitude 'vm'")
        elif b.v_magnitude is not None:
            raise CaseError(f"PQ bus {b.id} must not carry a voltage magnitude")

    seen = set()
    n = len(ids)
    for br in net.branches:
        if br.from_bus == br.to_bus:
            raise CaseError(f"self-loop branch at bus {br.from_bus}")
        for end in (br.from_bus, br.to_bus):
            if not 0 <= end < n:
                raise CaseError(f"branch endpoint {end} is not a bus")
        if br.r == 0 and br.x == 0:
            raise CaseError(f"zero impedance on branch {br.from_bus}-{br.to_bus}")
        if br.b < 0:
            raise CaseError(f"negative line charging on branch {br.from_bus}-{br.to_bus}")
        if br.pair in seen:
            raise CaseError(f"parallel branches between {br.from_bus} and {br.to_bus}")
        seen.add(br.pair)

    if n < 2 or not net.branches:
        raise CaseError("disconnected or degenerate network: needs at least one branch")
    if not _connected(n, net.edges):
        raise CaseError("disconnected network: every bus must be reachable from the slack")


def _connected(n: int, edges) -> bool:
    adj = {i: set() for i in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = {0}
    stack = [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


_BUS_KEYS = {"id", "kind", "pd", "qd", "vm"}
_BRANCH_KEYS = {"from", "to", "r", "x", "b"}
_TOP_KEYS = {"buses", "branches", "cost"}


def _check_keys(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise CaseError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise CaseError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise CaseError(f"{where}: missing key(s) {sorted(missing)}")


def _num(value, where) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CaseError(f"{where}: expected a number, got {value!r}")
    return float(value)


def parse_case(text: str, name: str = "") -> Network:
    """Parse a case JSON string into a validated :class:`Network`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseError(f"malformed JSON: {exc}") from exc
    _check_keys(doc, _TOP_KEYS, {"buses", "branches"}, "case")
    if not isinstance(doc["buses"], list) or not isinstance(doc["branches"], list):
        raise CaseError("case: 'buses' and 'branches' must be arrays")

    buses = []
    for k, raw in enumerate(doc["buses"]):
        where = f"buses[{k}]"
        _check_keys(raw, _BUS_KEYS, {"id", "kind"}, where)
        if isinstance(raw["id"], bool) or not isinstance(raw["id"], int):
            raise CaseError(f"{where}: id must be an integer")
        try:
            kind = BusKind(raw["kind"])
        except ValueError:
            raise CaseError(f"{where}: kind must be 'slack' or 'pq', got {raw['kind']!r}") from None
        vm = raw.get("vm")
        buses.append(
            Bus(
                id=raw["id"],
                kind=kind,
                p_demand=_num(raw.get("pd", 0.0), f"{where}.pd"),
                q_demand=_num(raw.get("qd", 0.0), f"{where}.qd"),
                v_magnitude=None if vm is None else _num(vm, f"{where}.vm"),
            )
        )
    buses.sort(key=lambda b: b.id)

    branches = []
    for k, raw in enumerate(doc["branches"]):
        where = f"branches[{k}]"
        _check_keys(raw, _BRANCH_KEYS, {"from", "to", "r", "x"}, where)
        for end in ("from", "to"):
            if isinstance(raw[end], bool) or not isinstance(raw[end], int):
                raise CaseError(f"{where}: '{end}' must be an integer bus id")
        branches.append(
            Branch(raw["from"], raw["to"], _num(raw["r"], f"{where}.r"), _num(raw["x"], f"{where}.x"),
                   _num(raw.get("b", 0.0), f"{where}.b"))
        )

    cost = doc.get("cost", [0.0, 1.0, 0.0])
    if not isinstance(cost, list) or len(cost) != 3:
        raise CaseError("case: 'cost' must be [c2, c1, c0]")
    cost = tuple(_num(c, "cost") for c in cost)
    return Network(tuple(buses), tuple(branches), cost, name=name)


def load_case(path) -> Network:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CaseError(f"cannot read case file {path}: {exc}") from exc
    return parse_case(text, name=path.stem)


def case_to_dict(net: Network) -> dict:
    buses = []
    for b in net.buses:
        entry = {"id": b.id, "kind": b.kind.value, "pd": b.p_demand, "qd": b.q_demand}
        if b.v_magnitude is not None:
            entry["vm"] = b.v_magnitude
        buses.append(entry)
    branches = [
        {"from": br.from_bus, "to": br.to_bus, "r": br.r, "x": br.x, "b": br.b}
        for br in net.branches
    ]
    return {"buses": buses, "branches": branches, "cost": list(net.cost_coefficients)}


def serialize_case(net: Network) -> str:
    return json.dumps(case_to_dict(net), indent=2)


def build_admittance(net: Network) -> np.ndarray:
    """Dense nodal admittance matrix ``Y`` of the pi-model network (``I = Y V``)."""
    n = net.n_buses
    Y = np.zeros((n, n), dtype=complex)
    for br in net.branches:
        y = br.admittance
        l, m = br.from_bus, br.to_bus
        Y[l, m] -= y
        Y[m, l] -= y
        Y[l, l] += y + 0.5j * br.b
        Y[m, m] += y + 0.5j * br.b
    return Y


def make_network(
    n_buses: int,
    edges,
    impedances,
    demands,
    v0: float = 1.0,
    shunts=None,
    cost=(0.0, 1.0, 0.0),
    name: str = "",
) -> Network:
    """Convenience constructor: ``impedances`` are complex, ``demands`` complex pd + i qd for buses 1..n-1."""
    buses = [Bus(0, BusKind.SLACK, 0.0, 0.0, v0)]
    for k, s in enumerate(demands, start=1):
        s = complex(s)
        buses.append(Bus(k, BusKind.PQ, s.real, s.imag))
    if shunts is None:
        shunts = [0.0] * len(edges)
    branches = [
        Branch(a, b, complex(z).real, complex(z).imag, float(sh))
        for (a, b), z, sh in zip(edges, impedances, shunts)
    ]
    return Network(tuple(buses), tuple(branches), tuple(cost), name=name)


def random_network(rng: np.random.Generator, n_buses: int, edges=None, complete=False,
                   name: str = "") -> Network:
    """Random connected network with inductive lines and random loads (for tests and bounds checks)."""
    if edges is None:
        if complete:
            edges = [(a, b) for a in range(n_buses) for b in range(a + 1, n_buses)]
        else:
            # random spanning tree plus a few chords
            edges = [(int(rng.integers(0, k)), k) for k in range(1, n_buses)]
            pairs = {frozenset(e) for e in edges}
            for _ in range(int(rng.integers(0, n_buses))):
                a, b = (int(v) for v in rng.choice(n_buses, size=2, replace=False))
                if frozenset((a, b)) not in pairs:
                    pairs.add(frozenset((a, b)))
                    edges.append((a, b))
    imp = [complex(rng.uniform(0.01, 0.1), rng.uniform(0.05, 0.5)) for _ in edges]
    dem = [complex(rng.uniform(-1.0, 2.0), rng.uniform(-1.0, 1.0)) for _ in range(n_buses - 1)]
    return make_network(n_buses, edges, imp, dem, v0=1.0, name=name)
