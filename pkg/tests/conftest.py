import warnings

# numba emits this once per process on machines with an old TBB
warnings.filterwarnings("ignore", message=".*TBB threading layer.*")

# criterion number -> (passed, one-line detail); filled by test_acceptance
ACCEPTANCE_RESULTS: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {key:>2}: {detail}")
