import warnings

import pytest

from uwbgame.errors import SmallFrameCountWarning


@pytest.fixture(autouse=True)
def _quiet_small_frames():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmallFrameCountWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import CRITERIA, RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid, title, _ in CRITERIA:
        if cid not in RESULTS:
            terminalreporter.write_line(f"[SKIP] criterion {cid}: {title} | not run")
            continue
        passed, title, detail, secs = RESULTS[cid]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {cid}: {title} | {detail} ({secs:.1f} s)")
