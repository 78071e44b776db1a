from hypothesis import settings

settings.register_profile("default", deadline=None)
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n:2d}: {detail}")
