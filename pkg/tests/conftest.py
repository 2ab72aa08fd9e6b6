import re

TITLES = {
    1: "Luxemburg norm of f=1 under (tu)^2 equals 3^-1/2",
    2: "classification of the worked examples",
    3: "representation identity for the N-function examples",
    4: "monotone family norm identity",
    5: "norm axioms on 200 random fields",
    6: "scale sandwich and exact modular additivity",
    7: "Delta2 estimates",
    8: "embedding hypothesis and modular inequality",
    9: "simple approximation and norm convergence",
    10: "parser agreement and malformed-input fuzzing",
}

_outcomes: dict[int, bool] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m or report.when == "teardown" and report.passed:
        return
    if report.when == "call" or report.failed:
        n = int(m.group(1))
        _outcomes[n] = _outcomes.get(n, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        verdict = "PASS" if _outcomes[n] else "FAIL"
        terminalreporter.write_line(f"criterion {n:>2}: {verdict}  {TITLES.get(n, '')}")
