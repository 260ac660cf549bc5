def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            if report.when != "call":
                continue
            props = dict(report.user_properties)
            if "criterion" not in props:
                continue
            verdict = "PASS" if outcome == "passed" else "FAIL"
            measured = props.get("measured", "not reached")
            lines.append((props["criterion"], f"{verdict} criterion {props['criterion']} "
                                              f"[tol {props['tolerance']}] measured: {measured}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
