"""Piecewise-LTI simulation of the consensus network under topology switching,
agent attrition and agent inclusion.

Live agents are mapped to graph nodes ``1..count`` in ascending id order.
The stacked state is ``[x_1, ..., x_N, v_1, ..., v_N]`` (plant states first,
then controller states, both in live order).
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DimensionMismatch, EventGraphMismatch
from .graphs import TopologyBank, laplacian
from .numerics import matrix_exponential
from .synthesis import Controller
from .sysmodel import StateSpace

log = logging.getLogger(__name__)

__all__ = [
    "Event", "Scenario", "SimResult", "build_closed_loop", "simulate", "disagreement",
    "run_case_study", "write_result",
]

EVENT_KINDS = ("remove", "add", "switch_set")


@dataclass
class Event:
    """A timed change to the network.

    ``remove`` drops the listed live agents. ``add`` appends the listed new
    agent ids (or ``count`` fresh ids when ``agents`` is empty) with plant
    states from ``states`` or the scenario defaults. ``switch_set`` makes
    ``bank`` the active topology bank.
    """

    time: float
    kind: str
    agents: tuple = ()
    states: tuple = ()
    count: int = 0
    bank: str | None = None

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        self.agents = tuple(int(a) for a in self.agents)
        self.states = tuple(np.asarray(s, dtype=float) for s in self.states)
        if self.kind == "add":
            if not self.agents:
                if self.count < 1:
                    raise ValueError("add event needs agent ids or a positive count")
            else:
                self.count = len(self.agents)
            if self.states and len(self.states) != self.count:
                raise ValueError("add event needs one initial state per new agent")
        if self.kind == "remove" and not self.agents:
            raise ValueError("remove event needs agent ids")
        if self.kind == "switch_set" and not self.bank:
            raise ValueError("switch_set event needs a bank name")


@dataclass
class Scenario:
    agent_nominal: StateSpace
    controller: Controller
    banks: dict
    initial_states: dict
    events: list = field(default_factory=list)
    t_end: float = 800.0
    dt: float = 0.01
    switch_period: float = 1.0
    dA: np.ndarray | None = None
    dB: np.ndarray | None = None
    active_bank: str | None = None
    default_states: dict = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        if isinstance(self.banks, TopologyBank):
            self.banks = {"default": self.banks}
        if not self.banks:
            raise ValueError("scenario needs at least one topology bank")
        if self.active_bank is None:
            self.active_bank = next(iter(self.banks))
        if self.active_bank not in self.banks:
            raise ValueError(f"unknown bank {self.active_bank!r}")
        if not self.dt > 0 or not self.t_end > 0 or not self.switch_period > 0:
            raise ValueError("dt, t_end and switch_period must be positive")
        n, m = self.agent_nominal.nstates, self.agent_nominal.ninputs
        self.dA = np.zeros((n, n)) if self.dA is None else np.asarray(self.dA, dtype=float)
        self.dB = np.zeros((n, m)) if self.dB is None else np.asarray(self.dB, dtype=float)
        if self.dA.shape != (n, n) or self.dB.shape != (n, m):
            raise DimensionMismatch("perturbation shapes do not match the agent")
        self.initial_states = {int(k): np.asarray(v, dtype=float).ravel()
                               for k, v in self.initial_states.items()}
        self.default_states = {int(k): np.asarray(v, dtype=float).ravel()
                               for k, v in self.default_states.items()}
        for v in list(self.initial_states.values()) + list(self.default_states.values()):
            if v.shape != (n,):
                raise DimensionMismatch(f"initial state of length {v.size}, expected {n}")
        times = [e.time for e in self.events]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("event times must be strictly increasing")
        if any(t < 0 or t >= self.t_end for t in times):
            raise ValueError("event times must lie in [0, t_end)")
        for e in self.events:
            if e.kind == "switch_set" and e.bank not in self.banks:
                raise ValueError(f"event switches to unknown bank {e.bank!r}")


@dataclass
class SimResult:
    """Trajectories on the uniform time grid.

    ``states[id]`` is ``(len(t), n)`` and holds NaN outside the agent's
    lifespans; ``lifespans[id]`` lists inclusive ``(first, last)`` step ranges.
    """

    t: np.ndarray
    states: dict
    lifespans: dict
    disagreement: np.ndarray
    agent_count: np.ndarray
    graph_trace: list
    event_log: list
    label: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def final_disagreement(self) -> float:
        return float(self.disagreement[-1])

    def agent_trajectory(self, agent_id):
        """Times and states of one agent over the steps where it is live."""
        X = self.states[agent_id]
        mask = np.zeros(len(self.t), dtype=bool)
        for a, b in self.lifespans[agent_id]:
            mask[a:b + 1] = True
        return self.t[mask], X[mask]

    def count_segments(self):
        """``(t_start, t_end, count)`` for each maximal run of constant agent count."""
        c = self.agent_count
        cuts = np.nonzero(np.diff(c))[0] + 1
        starts = np.concatenate([[0], cuts])
        ends = np.concatenate([cuts, [len(c)]])
        return [(float(self.t[a]), float(self.t[b - 1]), int(c[a])) for a, b in zip(starts, ends)]


def build_closed_loop(count: int, L, Abar, Bbar, K: Controller, C=None) -> np.ndarray:
    """``[[I (x) A + L (x) B K_D C, I (x) B K_C], [L (x) K_B C, I (x) K_A]]``.

    ``C`` defaults to the identity (full state exchange between neighbors).
    """
    L = np.atleast_2d(np.asarray(L, dtype=float))
    Abar = np.atleast_2d(np.asarray(Abar, dtype=float))
    Bbar = np.atleast_2d(np.asarray(Bbar, dtype=float))
    n = Abar.shape[0]
    C = np.eye(n) if C is None else np.atleast_2d(np.asarray(C, dtype=float))
    if L.shape != (count, count):
        raise DimensionMismatch(f"Laplacian is {L.shape}, expected {(count, count)}")
    if Bbar.shape[0] != n or C.shape[1] != n:
        raise DimensionMismatch("agent matrices are inconsistent")
    if K.K_D.shape != (Bbar.shape[1], C.shape[0]):
        raise DimensionMismatch(f"controller feed-through is {K.K_D.shape}")
    I = np.eye(count)
    top = np.hstack([np.kron(I, Abar) + np.kron(L, Bbar @ K.K_D @ C), np.kron(I, Bbar @ K.K_C)])
    bottom = np.hstack([np.kron(L, K.K_B @ C), np.kron(I, K.K_A)])
    return np.vstack([top, bottom])


def disagreement(states) -> float:
    """Largest componentwise spread ``max_c (max_i x_ic - min_i x_ic)`` across agents."""
    X = np.atleast_2d(np.asarray(states, dtype=float))
    if X.shape[0] <= 1:
        return 0.0
    return float(np.max(np.ptp(X, axis=0)))


def simulate(s: Scenario) -> SimResult:
    """Exact piecewise-LTI propagation on the grid ``t_k = k dt``.

    Event times are snapped to the nearest grid step. At a step carrying an
    event the event is applied first, so the recorded state at that step is
    the post-event state. The topology in force over ``[k dt, (k+1) dt)`` is
    graph ``(k // switch_steps) mod len(graphs)`` of the active bank's list
    for the live agent count.
    """
    P = s.agent_nominal
    n, nk = P.nstates, s.controller.nstates
    Abar, Bbar = P.A + s.dA, P.B + s.dB
    nsteps = int(round(s.t_end / s.dt))
    switch_steps = max(1, int(round(s.switch_period / s.dt)))
    t = np.arange(nsteps + 1) * s.dt

    events_at: dict[int, list] = {}
    for e in s.events:
        events_at.setdefault(int(round(e.time / s.dt)), []).append(e)
    event_steps = sorted(events_at)

    live = sorted(s.initial_states)
    x = {i: s.initial_states[i].copy() for i in live}
    v = {i: np.zeros(nk) for i in live}
    all_ids = set(live) | {a for e in s.events for a in e.agents}
    traj = {i: np.full((nsteps + 1, n), np.nan) for i in all_ids}
    spans: dict[int, list] = {i: [] for i in all_ids}
    born = {i: 0 for i in live}
    d = np.zeros(nsteps + 1)
    counts = np.zeros(nsteps + 1, dtype=int)
    bank_name = s.active_bank
    graph_trace, event_log = [], []
    phi_cache = {}

    def close_span(i, last):
        spans[i].append((born.pop(i), last))

    def apply(e: Event, k):
        nonlocal live, bank_name
        if e.kind == "remove":
            gone = [a for a in e.agents if a not in x]
            if gone:
                raise ValueError(f"cannot remove agents {gone}: not live at t={t[k]:g}")
            for a in e.agents:
                del x[a], v[a]
                close_span(a, k - 1)
            ids = list(e.agents)
        elif e.kind == "add":
            ids = list(e.agents) or [max(all_ids | set(x)) + j + 1 for j in range(e.count)]
            for j, a in enumerate(ids):
                if a in x:
                    raise ValueError(f"agent {a} is already live at t={t[k]:g}")
                if e.states:
                    x0 = e.states[j]
                elif a in s.default_states:
                    x0 = s.default_states[a]
                else:
                    raise ValueError(f"no initial state for new agent {a}")
                if x0.shape != (n,):
                    raise DimensionMismatch(f"initial state of agent {a} has length {x0.size}")
                if a not in traj:
                    all_ids.add(a)
                    traj[a] = np.full((nsteps + 1, n), np.nan)
                    spans[a] = []
                x[a], v[a] = x0.copy(), np.zeros(nk)
                born[a] = k
        else:
            bank_name = e.bank
            ids = []
        live = sorted(x)
        event_log.append({"t": float(t[k]), "requested_t": float(e.time), "kind": e.kind,
                          "agents": ids, "bank": bank_name, "live": list(live)})

    def transition(count, h):
        key = (bank_name, count, h)
        if key not in phi_cache:
            G = s.banks[bank_name].graphs_for(count)[h]
            Acl = build_closed_loop(count, laplacian(G), Abar, Bbar, s.controller, P.C)
            phi_cache[key] = np.ascontiguousarray(matrix_exponential(Acl, s.dt))
        return phi_cache[key]

    k = 0
    last_graph = None
    while True:
        for e in events_at.get(k, ()):
            apply(e, k)
        count = len(live)
        if count == 0:
            raise EventGraphMismatch(f"no live agents at t={t[k]:g}")
        graphs = s.banks[bank_name].graphs_for(count)
        if not graphs:
            raise EventGraphMismatch(
                f"bank {bank_name!r} has no graph on {count} nodes (t={t[k]:g})")
        h = (k // switch_steps) % len(graphs)
        if (bank_name, count, h) != last_graph:
            last_graph = (bank_name, count, h)
            graph_trace.append({"t": float(t[k]), "bank": bank_name, "count": count,
                                "graph_index": h, "graph": graphs[h].name})
        z = np.concatenate([x[i] for i in live] + [v[i] for i in live])
        if k == nsteps:
            Y = z[None, :]
            stop = k
        else:
            nxt = min([st for st in event_steps if st > k] + [(k // switch_steps + 1) * switch_steps,
                                                                   nsteps])
            Y = kernels.propagate(transition(count, h), z, nxt - k)
            stop = nxt - 1
        rows = Y[:stop - k + 1]
        for p, i in enumerate(live):
            traj[i][k:stop + 1] = rows[:, p * n:(p + 1) * n]
        d[k:stop + 1] = kernels.disagreement(np.ascontiguousarray(rows), count, n)
        counts[k:stop + 1] = count
        if k == nsteps:
            break
        z = Y[-1]
        for p, i in enumerate(live):
            x[i] = z[p * n:(p + 1) * n].copy()
            v[i] = z[count * n + p * nk:count * n + (p + 1) * nk].copy()
        k = nxt

    for i in list(born):
        close_span(i, nsteps)
    if not all(np.all(np.isfinite(traj[i][a:b + 1])) for i in spans for a, b in spans[i]):
        log.warning("non-finite states in scenario %s", s.label)
    return SimResult(t=t, states=traj, lifespans=spans, disagreement=d, agent_count=counts,
                     graph_trace=graph_trace, event_log=event_log, label=s.label,
                     meta={"dt": s.dt, "t_end": s.t_end, "switch_period": s.switch_period,
                           "dA": s.dA.tolist(), "dB": s.dB.tolist(),
                           "kernels": kernels.BACKEND})


def _trajectory_rows(result: SimResult, every: int):
    cols = []
    keep = np.zeros(len(result.t), dtype=bool)
    keep[::every] = True
    keep[-1] = True
    for i in sorted(result.states):
        X = result.states[i]
        mask = keep & ~np.isnan(X[:, 0])
        steps = np.nonzero(mask)[0]
        nst = X.shape[1]
        k = np.repeat(steps, nst)
        cols.append(np.column_stack([k, np.full(k.size, i), np.tile(np.arange(nst), steps.size),
                                     X[mask].ravel()]))
    if not cols:
        return np.zeros((0, 4))
    rows = np.vstack(cols)
    order = np.lexsort((rows[:, 2], rows[:, 1], rows[:, 0]))
    return rows[order]


def write_result(result: SimResult, directory, every: int = 1, formats=("csv", "json")):
    """Write ``trajectories.csv``, ``disagreement.csv`` and ``meta.json`` into ``directory``.

    ``every`` keeps one grid step in ``every`` (the final step is always kept).
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        rows = _trajectory_rows(result, every)
        path = out / "trajectories.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "agent_id", "state_index", "value"])
            tt = result.t[rows[:, 0].astype(int)]
            w.writerows(zip((f"{a:.10g}" for a in tt), rows[:, 1].astype(int),
                            rows[:, 2].astype(int), (repr(float(a)) for a in rows[:, 3])))
        written.append(path)
        keep = np.zeros(len(result.t), dtype=bool)
        keep[::every] = True
        keep[-1] = True
        path = out / "disagreement.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "d"])
            w.writerows(zip((f"{a:.10g}" for a in result.t[keep]),
                            (repr(float(a)) for a in result.disagreement[keep])))
        written.append(path)
    if "json" in formats:
        path = out / "meta.json"
        meta = dict(result.meta)
        meta.update({
            "label": result.label,
            "final_disagreement": result.final_disagreement,
            "events": result.event_log,
            "graph_trace": result.graph_trace,
            "agent_count_segments": [
                {"t_start": a, "t_end": b, "count": c} for a, b, c in result.count_segments()],
            "lifespans": {str(i): [[float(result.t[a]), float(result.t[b])] for a, b in sp]
                          for i, sp in sorted(result.lifespans.items())},
        })
        path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
        written.append(path)
    return written


def run_case_study(case, v_values=None, controller: Controller | None = None, config=None):
    """Simulate one of the shipped cases, one run per surge speed.

    Parameters
    ----------
    case : int or str
        Case key in the configuration (``1``-``4`` for the shipped UUV cases).
    v_values : sequence of float, optional
        Surge speeds; defaults to the case's own list.
    controller : Controller, optional
        Defaults to the controller synthesized from ``config``.
    config : Config or dict, optional
        Defaults to the shipped case-study configuration.
    """
    from .config import Config, load_default_config, synthesize_from_config

    if config is None:
        cfg = load_default_config()
    elif isinstance(config, Config):
        cfg = config
    else:
        cfg = Config.from_dict(config)
    if controller is None:
        controller = synthesize_from_config(cfg).controller
    return [simulate(sc) for sc in cfg.scenarios(case, controller, v_values)]
