"""Shared fixtures: the built-in testbed plus small hand-checkable networks."""

import pytest

from lifelinesim.network import Component, IntegratedNetwork, POWER, TRAFFIC, WATER


@pytest.fixture(scope="session")
def net():
    from lifelinesim.testbed import build_simple_testbed

    return build_simple_testbed()


@pytest.fixture(scope="session")
def triangle_net():
    """Reservoir feeding two junctions through a pipe triangle.

    Head 15 m keeps both junctions in the partial-service pressure band,
    so the solution exercises pressure-dependent demand.
    """
    comps = [
        Component("WR3", WATER, "reservoir", (0.0, 0.0), {"head": 15.0}),
        Component("J1", WATER, "demand_node", (800.0, 0.0), {"base_demand": 0.02, "elevation": 0.0}),
        Component("J2", WATER, "demand_node", (400.0, 300.0), {"base_demand": 0.015, "elevation": 0.0}),
        Component("P-R-1", WATER, "pipe", (0, 0),
                  {"length": 800.0, "diameter": 0.3, "roughness": 120.0}, ends=("WR3", "J1")),
        Component("P-R-2", WATER, "pipe", (0, 0),
                  {"length": 600.0, "diameter": 0.25, "roughness": 120.0}, ends=("WR3", "J2")),
        Component("P-1-2", WATER, "pipe", (0, 0),
                  {"length": 400.0, "diameter": 0.2, "roughness": 120.0}, ends=("J1", "J2")),
    ]
    return IntegratedNetwork(comps, [])


@pytest.fixture(scope="session")
def two_link_net():
    """Two parallel roads between one origin-destination pair."""
    comps = [
        Component("A", TRAFFIC, "zone_node", (0.0, 0.0)),
        Component("B", TRAFFIC, "zone_node", (1000.0, 0.0)),
        Component("R1", TRAFFIC, "road_link", (0, 0),
                  {"free_flow_time": 100.0, "capacity": 1000.0}, ends=("A", "B")),
        Component("R2", TRAFFIC, "road_link", (0, 0),
                  {"free_flow_time": 120.0, "capacity": 800.0}, ends=("A", "B")),
    ]
    return IntegratedNetwork(comps, [], od_matrix={"A": {"B": 1500.0}})


@pytest.fixture(scope="session")
def shed_net():
    """Three buses, 50 MW of import capacity against 60 MW of load."""
    comps = [
        Component("B1", POWER, "bus", (0.0, 0.0)),
        Component("B2", POWER, "bus", (100.0, 0.0)),
        Component("B3", POWER, "bus", (200.0, 0.0)),
        Component("GX", POWER, "external_grid", (0.0, 10.0),
                  {"max_mw": 50.0, "cost": 40.0}, buses=("B1",)),
        Component("LN1", POWER, "line", (0, 0),
                  {"susceptance": 80.0, "limit_mw": 100.0}, ends=("B1", "B2")),
        Component("LN2", POWER, "line", (0, 0),
                  {"susceptance": 80.0, "limit_mw": 100.0}, ends=("B2", "B3")),
        Component("LD2", POWER, "load", (100.0, 10.0), {"demand_mw": 30.0}, buses=("B2",)),
        Component("LD3", POWER, "load", (200.0, 10.0), {"demand_mw": 30.0}, buses=("B3",)),
    ]
    return IntegratedNetwork(comps, [])


def _line_road(comps, a, b, t0=60.0):
    for frm, to in ((a, b), (b, a)):
        comps.append(Component(f"RL-{frm}-{to}", TRAFFIC, "road_link", (0, 0),
                               {"free_flow_time": t0, "capacity": 1e9}, ends=(frm, to)))


@pytest.fixture(scope="session")
def corridor_net():
    """One 600 s road between two zones plus a pipe reachable from Z2.

    Free-flow travel (there is no traffic demand) makes crew trips
    exactly predictable, which the scheduling arithmetic tests rely on.
    """
    comps = [
        Component("Z1", TRAFFIC, "zone_node", (0.0, 0.0)),
        Component("Z2", TRAFFIC, "zone_node", (5000.0, 0.0)),
    ]
    _line_road(comps, "Z1", "Z2", t0=600.0)
    comps += [
        Component("WRX", WATER, "reservoir", (4990.0, 20.0), {"head": 15.0}),
        Component("JX", WATER, "demand_node", (5010.0, 20.0),
                  {"base_demand": 0.01, "elevation": 0.0}),
        Component("PW", WATER, "pipe", (0, 0),
                  {"length": 100.0, "diameter": 0.2, "roughness": 120.0}, ends=("WRX", "JX")),
    ]
    return IntegratedNetwork(comps, [], od_matrix={})


@pytest.fixture(scope="session")
def blockage_net():
    """Four zones in a line; a cut at Z2-Z3 isolates the water repair site."""
    comps = [Component(f"Z{i}", TRAFFIC, "zone_node", ((i - 1) * 100.0, 0.0)) for i in range(1, 5)]
    for a, b in (("Z1", "Z2"), ("Z2", "Z3"), ("Z3", "Z4")):
        _line_road(comps, a, b)
    comps += [
        Component("WRX", WATER, "reservoir", (190.0, 20.0), {"head": 15.0}),
        Component("JX", WATER, "demand_node", (210.0, 20.0),
                  {"base_demand": 0.01, "elevation": 0.0}),
        Component("PW", WATER, "pipe", (0, 0),
                  {"length": 100.0, "diameter": 0.2, "roughness": 120.0}, ends=("WRX", "JX")),
    ]
    return IntegratedNetwork(comps, [], od_matrix={})
