import json

import numpy as np
import pytest

from pfroots.netmodel import (
    Branch,
    Bus,
    BusKind,
    CaseError,
    MultipleSlackError,
    Network,
    build_admittance,
    case_to_dict,
    make_network,
    parse_case,
    random_network,
    serialize_case,
)


def _case(**over):
    doc = {
        "buses": [
            {"id": 0, "kind": "slack", "pd": 0, "qd": 0, "vm": 1.0},
            {"id": 1, "kind": "pq", "pd": 3.5, "qd": -3.5},
        ],
        "branches": [{"from": 0, "to": 1, "r": 0.04, "x": 0.2, "b": 0.0}],
        "cost": [0, 2, 0],
    }
    doc.update(over)
    return json.dumps(doc)


def test_bundled_two_bus(case2w):
    assert case2w.n_buses == 2 and case2w.n_branches == 1
    assert case2w.slack.v_magnitude == 1.0
    assert case2w.cost_coefficients == (0.0, 2.0, 0.0)
    np.testing.assert_allclose(case2w.injections(), [0, -3.5 + 3.5j])


def test_admittance_hand_value(case2w):
    y = 1 / (0.04 + 0.2j)
    # 1/(0.04+0.2i) = (0.04-0.2i)/0.0416
    assert y == pytest.approx(0.9615384615384615 - 4.807692307692308j)
    Y = build_admittance(case2w)
    np.testing.assert_allclose(Y, [[y, -y], [-y, y]])


def test_admittance_row_sums_and_symmetry(rng):
    for _ in range(20):
        net = random_network(rng, int(rng.integers(2, 8)))
        Y = build_admittance(net)
        np.testing.assert_allclose(Y, Y.T)
        np.testing.assert_allclose(Y.sum(axis=1), 0, atol=1e-12)


def test_shunt_enters_diagonal_only():
    net = make_network(2, [(0, 1)], [0.1j], [0.5], shunts=[0.4])
    Y = build_admittance(net)
    np.testing.assert_allclose(Y.sum(axis=1), [0.2j, 0.2j])


def test_round_trip(rng):
    net = random_network(rng, 6)
    again = parse_case(serialize_case(net))
    assert again == net
    assert case_to_dict(again) == case_to_dict(net)


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d["branches"][0].update(r=0.0, x=0.0), "impedance"),
        (lambda d: d["branches"][0].update(to=0), "self-loop"),
        (lambda d: d["buses"][1].update(id=5), "0..1"),
        (lambda d: d["buses"][0].update(kind="pv"), "kind"),
        (lambda d: d["buses"][0].pop("vm"), "vm"),
        (lambda d: d["buses"][1].update(pd="lots"), "pd"),
        (lambda d: d.update(extra=1), "extra"),
        (lambda d: d["branches"].append(dict(d["branches"][0])), "parallel"),
        (lambda d: d.update(branches=[]), "branch"),
    ],
)
def test_parse_errors(mutate, message):
    doc = json.loads(_case())
    mutate(doc)
    with pytest.raises(CaseError, match=message):
        parse_case(json.dumps(doc))


def test_not_json():
    with pytest.raises(CaseError):
        parse_case("{nope")


def test_disconnected():
    doc = json.loads(_case())
    doc["buses"].append({"id": 2, "kind": "pq", "pd": 0, "qd": 0})
    with pytest.raises(CaseError, match="connected"):
        parse_case(json.dumps(doc))


def test_two_slacks_rejected():
    doc = json.loads(_case())
    doc["buses"][1] = {"id": 1, "kind": "slack", "pd": 0, "qd": 0, "vm": 1.0}
    with pytest.raises(MultipleSlackError, match="positive-dimensional"):
        parse_case(json.dumps(doc))


def test_network_constructor_validates():
    with pytest.raises(CaseError):
        Network((Bus(0, BusKind.PQ), Bus(1, BusKind.PQ)), (Branch(0, 1, 0.0, 0.1),))
