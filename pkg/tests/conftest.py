"""Shared pytest hooks: prints the acceptance report after every run."""

_CRITERIA: dict[str, str] = {}


def pytest_collection_modifyitems(config, items):
    for item in items:
        name = getattr(getattr(item, "function", None), "_criterion", None)
        if name:
            _CRITERIA[item.nodeid] = name


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    outcomes: dict[str, str] = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", None)
            if nodeid in _CRITERIA and getattr(report, "when", "call") == "call":
                outcomes[nodeid] = status
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for nodeid, name in _CRITERIA.items():
        status = outcomes.get(nodeid)
        if status is None:
            continue
        flag = "PASS" if status == "passed" else "FAIL"
        markup = {"green": True} if flag == "PASS" else {"red": True}
        terminalreporter.write_line(f"[{flag}] {name}", **markup)
