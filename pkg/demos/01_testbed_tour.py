"""Tour of the built-in testbed: what's in it and how the pieces connect.

The bundled network is small enough to print in full — three coupled
lifelines laid over one set of coordinates, plus the single cross-network
dependency (an electric motor driving the water pump) that makes outages
propagate between them.
"""

from collections import Counter

from lifelinesim import build_simple_testbed, save_network, validate_network
from lifelinesim.network import POWER, TRAFFIC, WATER, access_node


def main():
    net = build_simple_testbed()

    print("=== component inventory ===")
    for network in (WATER, POWER, TRAFFIC):
        kinds = Counter(c.kind for c in net.components_of(network))
        counted = ", ".join(f"{n} {k}" for k, n in sorted(kinds.items()))
        print(f"{network:>8}: {counted}")

    print("\n=== cross-network dependencies ===")
    for dep in net.dependencies:
        print(f"{dep.source_id} ({net.component(dep.source_id).kind}) "
              f"-> {dep.target_id} ({net.component(dep.target_id).kind})  [{dep.kind}]")

    print("\n=== zones and priorities ===")
    for zone in net.nodes_of(TRAFFIC):
        print(f"{zone.id}: priority {net.zone_priority_of(zone.id)} at {zone.location}")

    print("\n=== crew access points (sample) ===")
    for cid in ("WP-W1-W2", "PL5", "WPU1"):
        print(f"{cid} is repaired from road node {access_node(net, cid)}")

    violations = validate_network(net)
    print(f"\nvalidation: {'clean' if not violations else violations}")

    save_network(net, "demo_testbed.json")
    print("wrote demo_testbed.json (round-trips through load_network)")


if __name__ == "__main__":
    main()
