"""Network schema, validation rules, status transitions, and access lookups."""

import math

import pytest

from lifelinesim.network import (
    Component,
    Dependency,
    IntegratedNetwork,
    NetworkValidationError,
    POWER,
    STATUS_FAILED,
    STATUS_OPERATIONAL,
    STATUS_REPAIRED,
    STATUS_UNDER_REPAIR,
    TRAFFIC,
    WATER,
    access_node,
    check_transition,
    component_location,
    load_network,
    nearest_zone,
    network_from_dict,
    network_to_dict,
    save_network,
    traffic_adjacency,
    validate_network,
)


class TestTestbedShape:
    def test_power_component_counts(self, net):
        counts = {}
        for c in net.components_of(POWER):
            counts[c.kind] = counts.get(c.kind, 0) + 1
        assert counts == {
            "bus": 9,
            "load": 3,
            "motor": 1,
            "external_grid": 1,
            "line": 5,
            "transformer": 2,
        }

    def test_water_component_counts(self, net):
        counts = {}
        for c in net.components_of(WATER):
            counts[c.kind] = counts.get(c.kind, 0) + 1
        assert counts == {
            "pipe": 12,
            "demand_node": 9,
            "pump": 1,
            "tank": 1,
            "reservoir": 1,
        }

    def test_traffic_component_counts(self, net):
        counts = {}
        for c in net.components_of(TRAFFIC):
            counts[c.kind] = counts.get(c.kind, 0) + 1
        assert counts == {"zone_node": 9, "road_link": 22}

    def test_has_motor_pump_dependency(self, net):
        kinds = {d.kind for d in net.dependencies}
        assert "motor_drives_pump" in kinds

    def test_validates_clean(self, net):
        assert validate_network(net) == []

    def test_every_lifeline_component_near_traffic(self, net):
        zones = [c for c in net.nodes_of(TRAFFIC)]
        for comp in net.components_of(WATER) + net.components_of(POWER):
            loc = component_location(comp, net)
            dmin = min(math.dist(loc, z.location) for z in zones)
            assert dmin < 1500.0, f"{comp.id} is {dmin:.0f} m from any zone"


class TestSerialization:
    def test_dict_round_trip(self, net):
        doc = network_to_dict(net)
        assert doc["schema_version"] == 1
        again = network_from_dict(doc)
        assert network_to_dict(again) == doc

    def test_file_round_trip(self, net, tmp_path):
        path = str(tmp_path / "net.json")
        save_network(net, path)
        again = load_network(path)
        assert network_to_dict(again) == network_to_dict(net)

    def test_packaged_testbed_matches_builder(self, net):
        from importlib import resources

        ref = resources.files("lifelinesim").joinpath("data/simple_testbed.json")
        with resources.as_file(ref) as path:
            shipped = load_network(str(path))
        assert network_to_dict(shipped) == network_to_dict(net)


class TestValidation:
    def test_dangling_dependency_target(self):
        comps = [
            Component("B1", POWER, "bus", (0.0, 0.0)),
            Component("M1", POWER, "motor", (0.0, 1.0), {"demand_mw": 1.0}, buses=("B1",)),
        ]
        net = IntegratedNetwork(comps, [Dependency("M1", "NOPE", "motor_drives_pump")])
        violations = validate_network(net)
        assert any("NOPE" in v.message or v.component_id == "NOPE" for v in violations)

    def test_same_network_dependency_flagged(self):
        comps = [
            Component("B1", POWER, "bus", (0.0, 0.0)),
            Component("B2", POWER, "bus", (1.0, 0.0)),
            Component("M1", POWER, "motor", (0.0, 1.0), {"demand_mw": 1.0}, buses=("B1",)),
            Component("M2", POWER, "motor", (1.0, 1.0), {"demand_mw": 1.0}, buses=("B2",)),
        ]
        net = IntegratedNetwork(comps, [Dependency("M1", "M2", "motor_drives_pump")])
        violations = validate_network(net)
        assert len(violations) >= 1

    def test_dangling_edge_end(self):
        comps = [
            Component("W1", WATER, "demand_node", (0.0, 0.0), {"base_demand": 0.01, "elevation": 0.0}),
            Component("P1", WATER, "pipe", (0, 0),
                      {"length": 10.0, "diameter": 0.2, "roughness": 100.0}, ends=("W1", "GONE")),
        ]
        violations = validate_network(IntegratedNetwork(comps, []))
        assert any("GONE" in v.message for v in violations)

    def test_duplicate_ids_flagged(self):
        comps = [
            Component("X", WATER, "demand_node", (0.0, 0.0), {"base_demand": 0.01, "elevation": 0.0}),
            Component("X", WATER, "demand_node", (1.0, 0.0), {"base_demand": 0.01, "elevation": 0.0}),
        ]
        violations = validate_network(IntegratedNetwork(comps, []))
        assert any(v.rule == "unique-id" for v in violations)


class TestStatusTransitions:
    @pytest.mark.parametrize(
        "old,new",
        [
            (STATUS_OPERATIONAL, STATUS_FAILED),
            (STATUS_FAILED, STATUS_UNDER_REPAIR),
            (STATUS_UNDER_REPAIR, STATUS_REPAIRED),
        ],
    )
    def test_legal(self, old, new):
        check_transition(old, new)  # should not raise

    @pytest.mark.parametrize(
        "old,new",
        [
            (STATUS_FAILED, STATUS_OPERATIONAL),
            (STATUS_OPERATIONAL, STATUS_REPAIRED),
            (STATUS_UNDER_REPAIR, STATUS_FAILED),
            (STATUS_REPAIRED, STATUS_UNDER_REPAIR),
            (STATUS_REPAIRED, STATUS_FAILED),  # repaired is terminal in a run
            ("bogus", STATUS_FAILED),
        ],
    )
    def test_illegal(self, old, new):
        with pytest.raises(ValueError):
            check_transition(old, new)


class TestTrafficAdjacency:
    def test_failed_link_removed(self, blockage_net):
        adj = traffic_adjacency(blockage_net, {"RL-Z2-Z3": STATUS_FAILED})
        z2_out = {nbr for nbr, _, _ in adj["Z2"]}
        assert "Z3" not in z2_out
        assert "Z1" in z2_out

    def test_failed_factor_keeps_link_at_penalty(self, blockage_net):
        adj = traffic_adjacency(blockage_net, {"RL-Z2-Z3": STATUS_FAILED}, failed_factor=5.0)
        weights = {nbr: w for nbr, w, _ in adj["Z2"]}
        assert weights["Z3"] == pytest.approx(300.0)  # 60 s at 5x
        assert weights["Z1"] == pytest.approx(60.0)

    def test_link_time_override(self, blockage_net):
        adj = traffic_adjacency(blockage_net, {}, link_times={"RL-Z1-Z2": 99.0})
        weights = {nbr: w for nbr, w, _ in adj["Z1"]}
        assert weights["Z2"] == pytest.approx(99.0)


class TestLookups:
    def test_access_node_uses_edge_midpoint(self, blockage_net):
        # PW spans (190,20)-(210,20): midpoint (200,20) is nearest Z3.
        assert access_node(blockage_net, "PW") == "Z3"

    def test_access_node_road_link_tie_breaks_lexicographically(self, blockage_net):
        # RL-Z2-Z3 midpoint (150,0) is equidistant from Z2 and Z3.
        assert access_node(blockage_net, "RL-Z2-Z3") == "Z2"

    def test_nearest_zone(self, net):
        assert nearest_zone(net, (0.0, 0.0)) == "T1"
        assert nearest_zone(net, (1990.0, 2010.0)) == "T9"

    def test_hazard_eligible_kinds(self, net):
        kinds = {c.kind for c in net.hazard_eligible()}
        assert kinds == {"pipe", "line", "road_link"}

    def test_zone_priority_defaults_to_one(self, net):
        assert net.zone_priority_of("T5") == 3
        assert net.zone_priority_of("T1") == 1
        assert net.zone_priority_of("NOPE") == 1

    def test_consumers(self, net):
        water_ids = {c.id for c in net.consumers(WATER)}
        assert water_ids == {f"W{i}" for i in range(1, 10)}
        power_ids = {c.id for c in net.consumers(POWER)}
        assert power_ids == {"PLD1", "PLD2", "PLD3", "PM1"}
