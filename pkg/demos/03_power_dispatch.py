"""Minimum-shedding dispatch: which loads stay lit when lines drop.

Solves the testbed's power network intact, then with the transformer
and the motor's feeder line out of service, and reports served/shed
megawatts plus whether the water pump's motor still has a live bus.
"""

from lifelinesim import build_simple_testbed, motor_operational, solve_power


def dispatch(net, statuses, label):
    state = solve_power(net, statuses)
    served = sum(state.served.values())
    print(f"\n=== {label} ===")
    print(f"served {served:.2f} MW, shed {state.total_shed:.2f} MW, "
          f"cost {state.total_cost:.1f}")
    for cid, mw in sorted(state.shed.items()):
        if mw > 1e-9:
            print(f"  shed {cid}: {mw:.2f} MW")
    print(f"  pump motor energized: {motor_operational(net, state, 'PM1')}")
    return state


def main():
    net = build_simple_testbed()

    state = dispatch(net, {}, "intact network")
    print("  line loadings:")
    for lid, flow in sorted(state.line_flow.items()):
        limit = net.component(lid).attrs["limit_mw"]
        print(f"    {lid}: {flow:+.2f} / {limit:.0f} MW")

    dispatch(net, {"PT1": "failed"}, "distribution transformer out")
    dispatch(net, {"PL5": "failed"}, "motor feeder line out")


if __name__ == "__main__":
    main()
