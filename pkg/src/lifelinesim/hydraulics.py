"""Pressure-dependent steady-state water network solver.

Quasi-static stepping: each step solves Hazen-Williams pipe headlosses
together with pressure-dependent nodal outflows by a damped Newton
iteration on (link flows, junction heads), then tank levels advance by
explicit Euler between steps. Failed pipes keep conveying but lose water
through a midpoint orifice sized to half the pipe cross-section; failed
or unpowered pumps close.

Units are SI throughout: flows m3/s, heads/pressures m of water column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .network import IN_SERVICE, IntegratedNetwork, WATER

G = 9.81
_HW_EXP = 1.852


class HydraulicError(Exception):
    """Solver failed to converge; message carries residual context."""


@dataclass(frozen=True)
class HydraulicParams:
    """Demand model thresholds and Newton controls."""

    p0: float = 0.0          # pressure below which no demand is served, m
    pf: float = 20.0         # pressure at which full demand is served, m
    e: float = 2.0           # demand exponent
    tol: float = 1e-6        # residual infinity-norm target
    max_iterations: int = 100
    q_reg: float = 1e-8      # derivative floor near zero flow
    q_smooth: float = 1e-5   # linear headloss segment below this flow
    leak_cd: float = 0.75    # orifice discharge coefficient
    p_smooth: float = 1e-3   # linear orifice segment below this pressure


def pda_demand(pressure: float, desired: float, p0: float = 0.0, pf: float = 20.0, e: float = 2.0):
    """Served demand at a node under the given pressure head.

    Zero at or below p0, the full desired demand above pf, and a
    power-law fraction in between. Accepts scalars or numpy arrays.
    """
    if not pf > p0:
        raise ValueError("pf must exceed p0")
    if e <= 0:
        raise ValueError("demand exponent must be positive")
    p = np.asarray(pressure, dtype=float)
    frac = np.clip((p - p0) / (pf - p0), 0.0, 1.0) ** (1.0 / e)
    out = np.asarray(desired, dtype=float) * frac
    return out if out.ndim else float(out)


def _pda_slope(p, desired, p0, pf, e):
    """d(demand)/d(pressure), capped near the lower threshold where the
    analytic slope blows up; used only inside the Newton Jacobian."""
    u = np.clip((np.asarray(p, dtype=float) - p0) / (pf - p0), 0.0, 1.0)
    inside = (u > 0.0) & (u < 1.0)
    u_floor = np.maximum(u, 1e-4)
    slope = desired / (e * (pf - p0)) * u_floor ** (1.0 / e - 1.0)
    return np.where(inside, slope, 0.0)


def hazen_williams_r(length: float, diameter: float, roughness: float) -> float:
    """Resistance r in hl = r * q^1.852 (SI units)."""
    return 10.667 * length / (roughness ** _HW_EXP * diameter ** 4.871)


# link type codes in the compiled system
_PIPE, _PUMP = 0, 1


@dataclass
class HydraulicState:
    """Snapshot of one converged steady state."""

    time: float
    node_head: dict[str, float]
    node_pressure: dict[str, float]
    actual_demand: dict[str, float]
    desired_demand: dict[str, float]
    link_flow: dict[str, float]
    leak_discharge: dict[str, float]
    tank_level: dict[str, float]
    tank_inflow: dict[str, float]
    dry_tanks: list[str]
    dead_nodes: list[str]
    residual: float
    iterations: int


class _System:
    """Arrays for one topology (statuses + tank closures fixed)."""

    def __init__(self):
        self.junction_ids: list[str] = []
        self.junction_z: np.ndarray | None = None
        self.junction_demand: np.ndarray | None = None  # desired, PDA nodes
        self.leak_coef: np.ndarray | None = None        # orifice coefficient per junction (0 = none)
        self.fixed_head: dict[str, float] = {}
        self.dead_nodes: list[str] = []


class WaterSimulator:
    """Stateful stepper holding tank levels and a warm-started solution."""

    def __init__(
        self,
        net: IntegratedNetwork,
        params: HydraulicParams | None = None,
        forced_off: set[str] | None = None,
    ):
        self.net = net
        self.params = params or HydraulicParams()
        self.forced_off: set[str] = set(forced_off or ())
        self.statuses: dict[str, str] = {}
        self.tank_level: dict[str, float] = {
            t.id: float(t.attrs["init_level"]) for t in net.components_of(WATER, "tank")
        }
        self._tanks = {t.id: t for t in net.components_of(WATER, "tank")}
        self._warm_h: dict[str, float] = {}
        self._warm_q: dict[str, float] = {}
        self._last_state: HydraulicState | None = None
        self._solved_levels: dict[str, float] | None = None

    # -- configuration ----------------------------------------------------

    def set_statuses(self, statuses: dict[str, str], forced_off: set[str] | None = None) -> None:
        self.statuses = dict(statuses)
        if forced_off is not None:
            self.forced_off = set(forced_off)
        self._last_state = None

    def _status(self, comp_id: str) -> str:
        comp = self.net.component(comp_id)
        return self.statuses.get(comp_id, comp.status)

    def _in_service(self, comp_id: str) -> bool:
        return self._status(comp_id) in IN_SERVICE and comp_id not in self.forced_off

    # -- compilation --------------------------------------------------------

    def _elevation(self, node_id: str) -> float:
        node = self.net.component(node_id)
        if node.kind == "demand_node":
            return float(node.attrs.get("elevation", 0.0))
        if node.kind == "tank":
            return float(node.attrs["elevation"])
        return 0.0  # reservoir pipe stub at datum

    def _compile(self, closed_tanks: set[str]) -> _System:
        sys = _System()
        net, prm = self.net, self.params

        for res in net.components_of(WATER, "reservoir"):
            sys.fixed_head[res.id] = float(res.attrs["head"])
        for tid, tank in self._tanks.items():
            if tid not in closed_tanks:
                sys.fixed_head[tid] = float(tank.attrs["elevation"]) + self.tank_level[tid]

        junctions: list[tuple[str, float, float, float]] = []  # id, z, desired, leak coef
        for node in net.components_of(WATER, "demand_node"):
            junctions.append((node.id, self._elevation(node.id), float(node.attrs["base_demand"]), 0.0))

        raw_links: list[tuple[str, int, str, str, float, float]] = []
        for pipe in net.components_of(WATER, "pipe"):
            a, b = pipe.ends
            r = hazen_williams_r(pipe.attrs["length"], pipe.attrs["diameter"], pipe.attrs["roughness"])
            if self._in_service(pipe.id):
                if a not in closed_tanks and b not in closed_tanks:
                    raw_links.append((pipe.id, _PIPE, a, b, r, 0.0))
            else:
                # broken pipe: two half-length segments around an orifice node
                leak_id = pipe.id + "::leak"
                area = 0.5 * math.pi * pipe.attrs["diameter"] ** 2 / 4.0
                coef = prm.leak_cd * area * math.sqrt(2.0 * G)
                z = (self._elevation(a) + self._elevation(b)) / 2.0
                junctions.append((leak_id, z, 0.0, coef))
                if a not in closed_tanks:
                    raw_links.append((pipe.id, _PIPE, a, leak_id, r / 2.0, 0.0))
                if b not in closed_tanks:
                    raw_links.append((pipe.id + "::b", _PIPE, leak_id, b, r / 2.0, 0.0))
        for pump in net.components_of(WATER, "pump"):
            if self._in_service(pump.id):
                a, b = pump.ends
                if a not in closed_tanks and b not in closed_tanks:
                    raw_links.append((pump.id, _PUMP, a, b, float(pump.attrs["head_gain"]), float(pump.attrs["qmax"])))

        # junction groups with no in-service fixed-head source stay dead:
        # zero flow, zero served demand, pressure pinned at elevation.
        junction_ids = [j[0] for j in junctions]
        all_nodes = junction_ids + list(sys.fixed_head)
        edges = [(l[2], l[3]) for l in raw_links]
        live: set[str] = set(sys.fixed_head)
        from . import graphs

        for comp in graphs.connected_components(all_nodes, edges):
            if comp & set(sys.fixed_head):
                live |= comp
        sys.dead_nodes = sorted(set(junction_ids) - live)
        dead = set(sys.dead_nodes)

        kept = [j for j in junctions if j[0] not in dead]
        sys.junction_ids = [j[0] for j in kept]
        sys.junction_z = np.array([j[1] for j in kept], dtype=float)
        sys.junction_demand = np.array([j[2] for j in kept], dtype=float)
        sys.leak_coef = np.array([j[3] for j in kept], dtype=float)
        self._raw_links = [l for l in raw_links if l[2] not in dead and l[3] not in dead]
        return sys

    # -- residual / jacobian -------------------------------------------------

    def _link_arrays(self, sys: _System):
        nl = len(self._raw_links)
        jidx = {jid: k for k, jid in enumerate(sys.junction_ids)}
        from_j = np.full(nl, -1, dtype=int)
        to_j = np.full(nl, -1, dtype=int)
        fixed_from = np.zeros(nl)
        fixed_to = np.zeros(nl)
        typ = np.zeros(nl, dtype=int)
        c1 = np.zeros(nl)
        c2 = np.ones(nl)
        for k, (rid, t, a, b, x1, x2) in enumerate(self._raw_links):
            typ[k] = t
            c1[k] = x1
            c2[k] = x2 if x2 else 1.0
            if a in jidx:
                from_j[k] = jidx[a]
            else:
                fixed_from[k] = sys.fixed_head[a]
            if b in jidx:
                to_j[k] = jidx[b]
            else:
                fixed_to[k] = sys.fixed_head[b]
        return from_j, to_j, fixed_from, fixed_to, typ, c1, c2

    def _headloss(self, q, typ, c1, c2):
        prm = self.params
        absq = np.abs(q)
        pipe_small = absq < prm.q_smooth
        hl_pipe = np.where(
            pipe_small,
            c1 * q * prm.q_smooth ** (_HW_EXP - 1.0),
            c1 * np.sign(q) * absq ** _HW_EXP,
        )
        dhl_pipe = np.where(
            pipe_small,
            c1 * prm.q_smooth ** (_HW_EXP - 1.0),
            _HW_EXP * c1 * absq ** (_HW_EXP - 1.0),
        )
        # pump: E = -gain so that F1 = (ha - hb) - E holds for both types
        gain = c1 * (1.0 - np.sign(q) * (absq / c2) ** 2)
        dgain = -2.0 * c1 * absq / c2 ** 2
        hl = np.where(typ == _PIPE, hl_pipe, -gain)
        dhl = np.where(typ == _PIPE, dhl_pipe, -dgain)
        return hl, np.maximum(dhl, prm.q_reg)

    def _demand(self, h, sys: _System):
        prm = self.params
        p = h - sys.junction_z
        d = pda_demand(p, sys.junction_demand, prm.p0, prm.pf, prm.e)
        dd = _pda_slope(p, sys.junction_demand, prm.p0, prm.pf, prm.e)
        leak = sys.leak_coef > 0
        if leak.any():
            pp = np.maximum(p, 0.0)
            small = pp < prm.p_smooth
            ql = np.where(small, sys.leak_coef * pp / math.sqrt(prm.p_smooth), sys.leak_coef * np.sqrt(pp))
            dql = np.where(
                small,
                sys.leak_coef / math.sqrt(prm.p_smooth),
                sys.leak_coef / (2.0 * np.sqrt(np.maximum(pp, prm.p_smooth))),
            )
            zero = p <= 0.0
            d = np.where(leak, np.where(zero, 0.0, ql), d)
            dd = np.where(leak, np.where(zero, 0.0, dql), dd)
        return d, dd

    def _solve_system(self, sys: _System):
        prm = self.params
        nj, nl = len(sys.junction_ids), len(self._raw_links)
        if nj == 0 and nl == 0:
            return np.zeros(0), np.zeros(0), 0.0, 0
        from_j, to_j, fixed_from, fixed_to, typ, c1, c2 = self._link_arrays(sys)

        default_h = max(sys.fixed_head.values(), default=0.0) + 5.0
        h = np.array([self._warm_h.get(jid, default_h + z) for jid, z in zip(sys.junction_ids, sys.junction_z)])
        q = np.array([self._warm_q.get(rid, 0.01) for rid, *_ in self._raw_links])

        def residual(qv, hv):
            ha = np.where(from_j >= 0, hv[np.maximum(from_j, 0)], fixed_from)
            hb = np.where(to_j >= 0, hv[np.maximum(to_j, 0)], fixed_to)
            hl, dhl = self._headloss(qv, typ, c1, c2)
            f1 = ha - hb - hl
            d, dd = self._demand(hv, sys)
            inflow = np.zeros(nj)
            np.add.at(inflow, to_j[to_j >= 0], qv[to_j >= 0])
            np.subtract.at(inflow, from_j[from_j >= 0], qv[from_j >= 0])
            f2 = inflow - d
            return np.concatenate([f1, f2]), dhl, dd

        F, dhl, dd = residual(q, h)
        norm = float(np.max(np.abs(F))) if F.size else 0.0
        iters = 0
        for iters in range(1, prm.max_iterations + 1):
            if norm < prm.tol:
                break
            J = np.zeros((nl + nj, nl + nj))
            J[:nl, :nl] = np.diag(-dhl)
            for k in range(nl):
                if from_j[k] >= 0:
                    J[k, nl + from_j[k]] += 1.0
                    J[nl + from_j[k], k] -= 1.0
                if to_j[k] >= 0:
                    J[k, nl + to_j[k]] -= 1.0
                    J[nl + to_j[k], k] += 1.0
            J[nl:, nl:] -= np.diag(dd + 1e-12)
            try:
                step = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                step = np.linalg.solve(J + 1e-10 * np.eye(nl + nj), -F)
            lam, best = 1.0, None
            for _ in range(16):
                qn, hn = q + lam * step[:nl], h + lam * step[nl:]
                Fn, dhln, ddn = residual(qn, hn)
                nn = float(np.max(np.abs(Fn)))
                if nn < norm * (1.0 - 1e-4 * lam) or nn < prm.tol:
                    best = (qn, hn, Fn, dhln, ddn, nn)
                    break
                if best is None or nn < best[5]:
                    best = (qn, hn, Fn, dhln, ddn, nn)
                lam /= 2.0
            q, h, F, dhl, dd, norm = best
        else:
            raise HydraulicError(
                f"no convergence after {prm.max_iterations} iterations; residual {norm:.3e} (tol {prm.tol:.1e})"
            )
        return q, h, norm, iters

    # -- public stepping ----------------------------------------------------

    def solve(self, time: float = 0.0) -> HydraulicState:
        """Converge a steady state at current statuses and tank levels."""
        prm = self.params
        closed: set[str] = set()
        dry: set[str] = set()
        for _ in range(1 + len(self._tanks)):
            sys = self._compile(closed)
            q, h, res_norm, iters = self._solve_system(sys)
            tank_inflow = self._tank_inflows(sys, q)
            toggled = False
            for tid, tank in self._tanks.items():
                if tid in closed:
                    continue
                level, a = self.tank_level[tid], tank.attrs
                inflow = tank_inflow.get(tid, 0.0)
                if level >= a["max_level"] - 1e-12 and inflow > 1e-9:
                    closed.add(tid)
                    toggled = True
                elif level <= a["min_level"] + 1e-12 and inflow < -1e-9:
                    closed.add(tid)
                    dry.add(tid)
                    toggled = True
            if not toggled:
                break

        state = self._build_state(sys, q, h, time, res_norm, iters, closed, dry)
        self._warm_h = dict(zip(sys.junction_ids, h))
        self._warm_q = {rid: qk for (rid, *_), qk in zip(self._raw_links, q)}
        self._last_state = state
        self._solved_levels = dict(self.tank_level)
        return state

    def _tank_inflows(self, sys: _System, q) -> dict[str, float]:
        inflow = {tid: 0.0 for tid in self._tanks}
        for (rid, typ, a, b, *_), qk in zip(self._raw_links, q):
            if b in inflow:
                inflow[b] += qk
            if a in inflow:
                inflow[a] -= qk
        return inflow

    def advance(self, dt: float) -> None:
        """Explicit Euler tank level update from the last solved flows."""
        if self._last_state is None:
            raise HydraulicError("advance() called before solve()")
        for tid, tank in self._tanks.items():
            inflow = self._last_state.tank_inflow[tid]
            a = tank.attrs
            level = self.tank_level[tid] + inflow * dt / a["area"]
            self.tank_level[tid] = min(max(level, a["min_level"]), a["max_level"])

    def is_stationary(self) -> bool:
        """True when the last solution is current and levels cannot change.

        A level that moved since the solve (including being clipped at a
        tank bound by ``advance``) invalidates the cached solution, so
        the simulator is not stationary until it re-solves.
        """
        if self._last_state is None or self._solved_levels is None:
            return False
        for tid in self._tanks:
            if abs(self.tank_level[tid] - self._solved_levels[tid]) > 1e-12:
                return False
        for tid, tank in self._tanks.items():
            inflow = self._last_state.tank_inflow[tid]
            level = self.tank_level[tid]
            a = tank.attrs
            moving_up = inflow > 1e-9 and level < a["max_level"] - 1e-12
            moving_down = inflow < -1e-9 and level > a["min_level"] + 1e-12
            if moving_up or moving_down:
                return False
        return True

    def _build_state(self, sys, q, h, time, res_norm, iters, closed, dry) -> HydraulicState:
        net, prm = self.net, self.params
        node_head: dict[str, float] = dict(sys.fixed_head)
        node_pressure: dict[str, float] = {}
        actual: dict[str, float] = {}
        desired: dict[str, float] = {}
        leak_out: dict[str, float] = {}

        heads = {jid: float(v) for jid, v in zip(sys.junction_ids, h)}
        for node in net.components_of(WATER, "demand_node"):
            z = self._elevation(node.id)
            head = heads.get(node.id, z)  # dead nodes pin to elevation
            node_head[node.id] = head
            node_pressure[node.id] = head - z
            desired[node.id] = float(node.attrs["base_demand"])
            actual[node.id] = float(
                pda_demand(head - z, node.attrs["base_demand"], prm.p0, prm.pf, prm.e)
            )
        d_all, _ = self._demand(h, sys) if len(h) else (np.zeros(0), None)
        for jid, dv, coef in zip(sys.junction_ids, d_all, sys.leak_coef):
            if coef > 0:
                leak_out[jid.split("::")[0]] = float(dv)
                node_head[jid] = heads[jid]

        link_flow: dict[str, float] = {c.id: 0.0 for c in net.edges_of(WATER)}
        for (rid, *_), qk in zip(self._raw_links, q):
            if rid.endswith("::b"):
                continue  # report the inlet half as the pipe's through-flow
            link_flow[rid.split("::")[0]] = float(qk)

        tank_inflow = self._tank_inflows(sys, q)
        for tid in self._tanks:
            tank_inflow.setdefault(tid, 0.0)
        return HydraulicState(
            time=time,
            node_head=node_head,
            node_pressure=node_pressure,
            actual_demand=actual,
            desired_demand=desired,
            link_flow=link_flow,
            leak_discharge=leak_out,
            tank_level=dict(self.tank_level),
            tank_inflow={t: float(v) for t, v in tank_inflow.items()},
            dry_tanks=sorted(dry),
            dead_nodes=list(sys.dead_nodes),
            residual=res_norm,
            iterations=iters,
        )


def solve_hydraulics(
    net: IntegratedNetwork,
    component_statuses: dict[str, str],
    duration: float,
    step: float,
    params: HydraulicParams | None = None,
    forced_off: set[str] | None = None,
) -> list[HydraulicState]:
    """Quasi-static run over ``duration`` with one state every ``step`` s.

    Statuses stay fixed for the whole run; the returned list holds
    duration/step + 1 states (the initial steady state included) with
    tank levels integrated between them.
    """
    if step <= 0 or duration < 0:
        raise ValueError("duration must be >= 0 and step > 0")
    n = duration / step
    if abs(n - round(n)) > 1e-9:
        raise ValueError("step must divide duration evenly")
    sim = WaterSimulator(net, params, forced_off)
    sim.set_statuses(component_statuses)
    states = [sim.solve(0.0)]
    for k in range(1, int(round(n)) + 1):
        sim.advance(step)
        states.append(sim.solve(k * step))
    return states
