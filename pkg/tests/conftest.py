import re

CRITERIA_TITLES = {
    1: "distance-transform exactness vs brute force (500 masks <= 64x64, 1e-9)",
    2: "component labeling equals flood-fill oracle (500 maps <= 128x128, exact)",
    3: "partition and marker invariants on 100 scenes (seeds 1-100)",
    4: "sparse-regime exactness for all 100 seeds",
    5: "overlap recovery <= 2% error, baseline undercounts >= pair count",
    6: "degenerate parameters reduce split counts to baseline, exact",
    7: "sensitivity-curve shapes (sigma / peak height / min distance)",
    8: "sickled-fraction arithmetic, exhaustive for counts <= 100",
    9: "temporal-series fidelity, logistic schedule saturating at 0.91",
    10: "byte-identical outputs for workers in {1, 4, 8}",
    11: "I/O contracts: PNG round-trip, CSV header, sampling index sets",
    12: "throughput: < 1 s per dense frame, >= 3x speedup at 4 workers",
}

_NODE_RE = re.compile(r"test_acceptance\.py::test_c(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[int, list[str]] = {}
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL"), ("skipped", "SKIP")):
        for report in terminalreporter.stats.get(status, []):
            m = _NODE_RE.search(getattr(report, "nodeid", ""))
            if m:
                outcomes.setdefault(int(m.group(1)), []).append(label)
    if not outcomes:
        return
    tw = terminalreporter
    tw.write_sep("=", "acceptance criteria")
    for n in sorted(outcomes):
        labels = outcomes[n]
        if "FAIL" in labels:
            verdict, note = "FAIL", ""
        elif all(l == "SKIP" for l in labels):
            verdict, note = "SKIP", ""
        elif "SKIP" in labels:
            verdict = "PASS"
            note = f" ({labels.count('SKIP')} sub-check skipped on this host)"
        else:
            verdict, note = "PASS", ""
        tw.write_line(f"[{verdict}] criterion {n:2d}: {CRITERIA_TITLES.get(n, '')}{note}")
