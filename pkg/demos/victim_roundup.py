#!/usr/bin/env python3
"""Re-run the bundled ten-victim experiment and print the scoreboard.

Ten profiles warmed up on real-ish browsing plans, one attacker site,
one probing campaign across all ten audiences. Every victim visits in a
different reporting window, so counters and log lines pair up one to
one and the attacker reads memberships straight off.
"""

from adtrap import scenarios
from adtrap.scenario import load_scenario
from adtrap.simulation import run_attack, run_scenario
from adtrap.trap import render_value, summary_line


def main():
    scenario = load_scenario(scenarios.path("table2_experiment"))
    trace = run_scenario(scenario)
    result = run_attack(scenario, trace)

    by_network = {u.network_id: u for u in scenario.users}
    names = scenario.taxonomy.audience_names

    print(f"{'visitor':14} {'user':5} {'inferred audience':28} {'actual':28} ok")
    print("-" * 82)
    for nid in sorted(result.assignments):
        a = result.assignments[nid]
        user = by_network[nid]
        actual = trace.ground_truth[user.id]
        inferred = render_value(a.audience) if a.status == "exact" else a.status
        shown = next(iter(names({a.audience}))) if a.audience else inferred
        actual_name = ", ".join(sorted(names(actual))) or "-"
        print(
            f"{nid:14} {user.id:5} {shown:28} {actual_name:28} "
            f"{'yes' if result.correct[nid] else 'NO'}"
        )
    print("-" * 82)
    print(summary_line(result))
    print(f"impressions served: {len(trace.impressions)}, "
          f"log entries: {len(trace.logs['monads'])}")


if __name__ == "__main__":
    main()
