"""UUV depth-consensus case study: agent model, canonical graph bank, reference
controller and the seed configuration shipped with the package."""
from __future__ import annotations

import copy

import numpy as np

from .graphs import Graph, TopologyBank, complete_graph, cycle_graph, star_graph
from .synthesis import Controller

__all__ = [
    "V0", "UUV_A", "UUV_B", "UUV_C", "DV_BOUND", "V_SWEEP", "REFERENCE_CONTROLLER",
    "uuv_matrices", "canonical_bank", "default_config",
]

V0 = 0.3
DV_BOUND = 0.075
V_SWEEP = (0.3750, 0.3450, 0.3150, 0.2850, 0.2550, 0.2250)


def uuv_matrices(v: float = V0):
    """Pitch rate, pitch angle and depth of a UUV moving at surge speed ``v``."""
    A = np.array([[-0.7, -0.3, 0.0],
                  [1.0, 0.0, 0.0],
                  [0.0, -v, 0.0]])
    B = np.array([[0.035], [0.0], [0.0]])
    C = np.eye(3)
    return A, B, C


UUV_A, UUV_B, UUV_C = uuv_matrices()

# Published fourth-order protocol, kept as a reference for the synthesized one.
REFERENCE_CONTROLLER = Controller(
    K_A=np.array([[-0.3227, -0.3283], [0.658, -0.5469]]),
    K_B=np.array([[0.01976, -0.05098, 0.4598], [-0.01496, 0.1107, -0.4072]]),
    K_C=np.array([[-0.2959, 0.09703]]),
    K_D=np.array([[-0.003565, -0.2504, 1.13]]),
)


def _three_node_graphs():
    return [
        Graph(3, frozenset({(1, 2), (2, 3)}), "path3-a"),
        Graph(3, frozenset({(1, 2), (1, 3)}), "path3-b"),
        Graph(3, frozenset({(1, 3), (2, 3)}), "path3-c"),
        Graph(3, frozenset({(1, 2), (2, 3), (1, 3)}), "complete3"),
    ]


def canonical_bank() -> TopologyBank:
    """Three graphs on 4 nodes, every connected graph on 3 nodes, three graphs on 5 nodes.

    The pool has 9 + 8 + 12 = 29 entries and contains the eigenvalue 2
    twice (from the 4-cycle).
    """
    return TopologyBank.from_sets(
        [cycle_graph(4), star_graph(4), complete_graph(4)],
        _three_node_graphs(),
        [cycle_graph(5), star_graph(5), complete_graph(5)],
    )


def _graph_entry(G: Graph):
    return {"name": G.name, "edges": [list(e) for e in G.edge_list()]}


def default_config() -> dict:
    """The full case-study configuration as a JSON-ready dict."""
    A, B, C = uuv_matrices()
    zA = np.zeros((3, 3))
    lo, hi = zA.copy(), zA.copy()
    lo[2, 1], hi[2, 1] = -DV_BOUND, DV_BOUND
    direction = zA.copy()
    direction[2, 1] = -1.0
    bank = canonical_bank()
    add5 = {"time": 200.0, "kind": "add", "agents": [5]}
    cases = {
        "1": {"description": "4 agents, agent 5 joins at 200 s, agents 4 and 5 leave at 500 s",
              "initial_agents": [1, 2, 3, 4],
              "events": [add5, {"time": 500.0, "kind": "remove", "agents": [4, 5]}],
              "parameter_values": [V0]},
        "2": {"description": "4 agents, agent 4 leaves at 200 s, agents 4 and 5 join at 500 s",
              "initial_agents": [1, 2, 3, 4],
              "events": [{"time": 200.0, "kind": "remove", "agents": [4]},
                         {"time": 500.0, "kind": "add", "agents": [4, 5]}],
              "parameter_values": [V0]},
    }
    for new, old in (("3", "1"), ("4", "2")):
        cases[new] = copy.deepcopy(cases[old])
        cases[new]["description"] += ", surge speed sweep"
        cases[new]["parameter_values"] = list(V_SWEEP)
    return {
        "agent": {
            "A": A.tolist(), "B": B.tolist(), "C": C.tolist(),
            "perturbation": {"dA_lower": lo.tolist(), "dA_upper": hi.tolist(),
                             "dB_lower": [[0.0]] * 3, "dB_upper": [[0.0]] * 3},
            "grid_count": 21,
            "parameter": {"name": "v", "nominal": V0, "dA_direction": direction.tolist()},
        },
        "topology": {
            "default_bank": "canonical",
            "banks": {
                "canonical": {
                    "nominal": bank.nominal, "reduced": bank.reduced, "enlarged": bank.enlarged,
                    "graphs": {str(c): [_graph_entry(G) for G in bank.sets[c]]
                               for c in bank.counts()},
                },
            },
        },
        "synthesis": {"gamma_rel": 1.0, "workers": None, "tolerances": {}},
        "scenario": {
            "dt": 0.01, "t_end": 800.0, "switch_period": 1.0,
            "initial_states": {str(i): [round(0.1 * i, 10)] * 3 for i in range(1, 6)},
            "cases": cases,
        },
        "output": {"directory": "raidd-out", "formats": ["csv", "json"], "record_every": 1},
    }
