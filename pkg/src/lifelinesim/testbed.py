"""Built-in small interconnected testbed.

Layout (all coordinates in meters):

* traffic: 3x3 grid of intersections T1..T9 at 1000 m spacing, every
  intersection both a trip generator and attractor. Two one-way
  restrictions (no T1->T2, no T9->T8) bring the directed link count to 22.
* water: demand nodes W1..W9 shadow the intersections; a low reservoir
  feeds the grid through a booster pump at the southwest corner and an
  elevated tank hangs off the far corner. 11 grid pipes + 1 tank riser.
* power: a dual-incomer external grid feeds two transformers; one feeder
  serves two loads to the west, the other a third load and the pump
  motor in the far southwest over five lines and nine buses.

The motor drives the water pump (cross-network dependency), and every
component sits within reach of a traffic node for crew access.
"""

from __future__ import annotations

from .network import (
    Component,
    Dependency,
    IntegratedNetwork,
    NetworkValidationError,
    POWER,
    TRAFFIC,
    WATER,
    validate_network,
)

GRID_SPACING = 1000.0
ROAD_FREE_FLOW_TIME = 72.0  # 1000 m at ~50 km/h
ROAD_CAPACITY = 1200.0  # veh/h
OD_DEMAND = 80.0  # veh/h for every ordered zone pair

PIPE_DIAMETER = 0.35
PIPE_ROUGHNESS = 110.0
NODE_DEMAND = 0.01  # m3/s
RESERVOIR_HEAD = 5.0
PUMP_HEAD_GAIN = 50.0
PUMP_QMAX = 0.3
TANK = dict(elevation=12.0, area=40.0, min_level=0.0, max_level=5.0, init_level=5.0)

LINE_SUSCEPTANCE = 80.0  # MW/rad


def _zone_coords() -> dict[str, tuple[float, float]]:
    coords = {}
    for row in range(3):
        for col in range(3):
            coords[f"T{row * 3 + col + 1}"] = (col * GRID_SPACING, row * GRID_SPACING)
    return coords


_GRID_PAIRS = [
    ("1", "2"), ("2", "3"), ("4", "5"), ("5", "6"), ("7", "8"), ("8", "9"),
    ("1", "4"), ("2", "5"), ("3", "6"), ("4", "7"), ("5", "8"), ("6", "9"),
]
_ONE_WAY_DROPPED = {("T1", "T2"), ("T9", "T8")}
_WATER_PIPE_DROPPED = ("W5", "W8")


def build_simple_testbed() -> IntegratedNetwork:
    """Deterministically build and validate the built-in network."""
    comps: list[Component] = []
    zones = _zone_coords()

    # --- traffic ---------------------------------------------------------
    for zid, xy in zones.items():
        comps.append(Component(zid, TRAFFIC, "zone_node", xy))
    for a, b in _GRID_PAIRS:
        for frm, to in ((f"T{a}", f"T{b}"), (f"T{b}", f"T{a}")):
            if (frm, to) in _ONE_WAY_DROPPED:
                continue
            comps.append(
                Component(
                    f"TL-{frm}-{to}",
                    TRAFFIC,
                    "road_link",
                    (0.0, 0.0),  # edge location derives from its endpoints
                    {"free_flow_time": ROAD_FREE_FLOW_TIME, "capacity": ROAD_CAPACITY},
                    ends=(frm, to),
                )
            )
    od = {
        o: {d: OD_DEMAND for d in zones if d != o}
        for o in zones
    }
    priority = {z: 1 for z in zones}
    priority.update({"T2": 2, "T4": 2, "T6": 2, "T8": 2, "T5": 3})

    # --- water -----------------------------------------------------------
    woff = (60.0, 40.0)
    wxy = {f"W{i}": (zones[f"T{i}"][0] + woff[0], zones[f"T{i}"][1] + woff[1]) for i in range(1, 10)}
    for wid, xy in wxy.items():
        comps.append(
            Component(wid, WATER, "demand_node", xy, {"base_demand": NODE_DEMAND, "elevation": 0.0})
        )
    comps.append(Component("WR1", WATER, "reservoir", (-540.0, -360.0), {"head": RESERVOIR_HEAD}))
    comps.append(Component("WT1", WATER, "tank", (2060.0, 2160.0), dict(TANK)))
    comps.append(
        Component(
            "WPU1",
            WATER,
            "pump",
            (0.0, 0.0),
            {"head_gain": PUMP_HEAD_GAIN, "qmax": PUMP_QMAX},
            ends=("WR1", "W1"),
        )
    )
    pipe_pairs = [(f"W{a}", f"W{b}") for a, b in _GRID_PAIRS if (f"W{a}", f"W{b}") != _WATER_PIPE_DROPPED]
    pipe_pairs.append(("W9", "WT1"))
    for frm, to in pipe_pairs:
        length = 120.0 if to == "WT1" else GRID_SPACING
        comps.append(
            Component(
                f"WP-{frm}-{to}",
                WATER,
                "pipe",
                (0.0, 0.0),
                {"length": length, "diameter": PIPE_DIAMETER, "roughness": PIPE_ROUGHNESS},
                ends=(frm, to),
            )
        )

    # --- power -----------------------------------------------------------
    bus_xy = {
        "B1": (940.0, 2300.0),
        "B2": (1060.0, 2300.0),
        "B3": (200.0, 2000.0),
        "B4": (1800.0, 2000.0),
        "B5": (0.0, 1000.0),
        "B6": (-60.0, 50.0),
        "B7": (1940.0, 1050.0),
        "B8": (1940.0, 50.0),
        "B9": (-500.0, -320.0),
    }
    for bid, xy in bus_xy.items():
        comps.append(Component(bid, POWER, "bus", xy))
    comps.append(
        Component(
            "PG1",
            POWER,
            "external_grid",
            (1000.0, 2350.0),
            {"max_mw": 200.0, "cost": 40.0},
            buses=("B1", "B2"),
        )
    )
    branches = [
        ("PT1", "transformer", "B1", "B3", 60.0),
        ("PT2", "transformer", "B2", "B4", 60.0),
        ("PL1", "line", "B3", "B5", 50.0),
        ("PL2", "line", "B5", "B6", 30.0),
        ("PL3", "line", "B4", "B7", 40.0),
        ("PL4", "line", "B7", "B8", 20.0),
        ("PL5", "line", "B8", "B9", 10.0),
    ]
    for bid, kind, frm, to, limit in branches:
        comps.append(
            Component(
                bid,
                POWER,
                kind,
                (0.0, 0.0),
                {"susceptance": LINE_SUSCEPTANCE, "limit_mw": limit},
                ends=(frm, to),
            )
        )
    for lid, bus, mw in (("PLD1", "B5", 20.0), ("PLD2", "B6", 15.0), ("PLD3", "B7", 25.0)):
        x, y = bus_xy[bus]
        comps.append(Component(lid, POWER, "load", (x - 20.0, y), {"demand_mw": mw}, buses=(bus,)))
    comps.append(Component("PM1", POWER, "motor", (-520.0, -340.0), {"demand_mw": 2.0}, buses=("B9",)))

    deps = [Dependency("PM1", "WPU1", "motor_drives_pump")]

    net = IntegratedNetwork(comps, deps, od_matrix=od, zone_priority=priority)
    violations = validate_network(net)
    if violations:  # would be a programming error in the constants above
        raise NetworkValidationError(violations)
    return net
