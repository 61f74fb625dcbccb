"""Smoke test for the wearpolicy extension module."""

import wearpolicy as wp


def main():
    limits = wp.example_limits()
    history = wp.example2_history()
    rates = wp.example2_rates()
    assert history.counts() == (8, 7), history.counts()

    fit = wp.objective(rates, limits, history)
    assert fit["sse"] == 1.0, fit
    assert fit["matched_events"] == (8, 7)

    again = wp.FailureHistory.from_csv(history.to_csv())
    assert again.events() == history.events()

    sim = wp.simulate(wp.RateTable.uniform(9, 9), limits, days=30)
    assert sim.events() == [(10, "both"), (20, "both"), (30, "both")], sim.events()

    costs = wp.CostModel(100.0, 300.0, 400.0)
    policy = wp.solve(rates, costs, limits)
    assert policy.structure_passed()
    assert policy.action(0, 0) == "proceed"
    assert policy.action(90, 90) == "replace-both"
    part1, part2 = policy.thresholds()
    assert len(part1) == 91 and len(part2) == 91

    report = wp.compare(policy, rates, costs, history)
    assert report["reduction_pct"] >= 20.0, report

    cheap = wp.solve(rates, wp.CostModel(100.0, 300.0, 350.0), limits)
    both = policy.action_counts()["replace-both"]
    assert cheap.action_counts()["replace-both"] > both

    lp = wp.export_lp(rates, costs, limits)
    assert lp.startswith("Maximize") and "Subject To" in lp

    est = wp.estimate(history, limits, seed=1, total_iters=2000)
    assert est["objective"] >= 0.0
    assert isinstance(est["rates"], wp.RateTable)

    land = wp.landscape(wp.example1_history(), limits, seed=1, population=200,
                        walk_starts=50, walk_steps=200)
    assert land["amplitude"] is not None and land["r1"] is not None

    try:
        wp.CostModel(100.0, 120.0, 220.0, alpha=1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid discount accepted")

    print("wearpolicy", wp.__version__, "smoke test passed:",
          f"sse={fit['sse']}, reduction={report['reduction_pct']:.1f}%,",
          f"estimate objective={est['objective']}")


if __name__ == "__main__":
    main()
