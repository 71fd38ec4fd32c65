from hypothesis import HealthCheck, settings

settings.register_profile("numrad", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("numrad")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import PRESET, RESULTS

    if not RESULTS:
        return
    terminalreporter.section(f"acceptance criteria ({PRESET} preset)")
    for cid in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[cid].line())
