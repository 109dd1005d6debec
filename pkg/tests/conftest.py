"""Collects acceptance-criterion outcomes and prints one line per criterion
at the end of the run."""

import pytest

_CRITERIA: dict[int, list[tuple[bool, str]]] = {}


@pytest.fixture
def criterion(request, record_property):
    """Tag the test with its criterion number; call the returned function to
    attach a one-line measurement to the summary."""
    marker = request.node.get_closest_marker("criterion")
    if marker is None:
        raise RuntimeError("criterion fixture needs @pytest.mark.criterion(n)")
    record_property("criterion", int(marker.args[0]))

    def note(detail: str):
        record_property("detail", detail)

    return note


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _CRITERIA.setdefault(props["criterion"], []).append((report.passed, props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        results = _CRITERIA[number]
        status = "PASS" if all(ok for ok, _ in results) else "FAIL"
        details = "; ".join(d for _, d in results if d)
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {details}")
