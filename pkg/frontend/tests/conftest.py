"""Shared pytest plumbing: per-criterion pass/fail summary lines."""

import json

_CRITERIA: dict[int, tuple[str, bool]] = {}


def record_criterion(number: int, description: str, passed: bool) -> None:
    _CRITERIA[number] = (description, passed)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        description, passed = _CRITERIA[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{verdict}] criterion {number}: {description}")


def write_csv(path, columns, rows, band="thz", seed=7):
    """Handcrafted result file following the simulator's documented schema."""
    scenario = json.dumps(
        {"band": band, "trials": 2, "seed": seed},
        sort_keys=True, separators=(",", ":"),
    )
    lines = [f"# scenario={scenario} seed={seed}", ",".join(columns)]
    lines += [",".join(f"{v:.9g}" for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return str(path)
