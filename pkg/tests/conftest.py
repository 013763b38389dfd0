import numpy as np
import pytest

from ecg_rr.datagen import GenConfig, generate_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """30 records, enough for split/train/eval plumbing tests."""
    out = tmp_path_factory.mktemp("small_ds")
    generate_dataset(30, GenConfig(), seed=7, out_dir=out)
    return out


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", []))
            if "criterion" in props and getattr(rep, "when", "call") == "call":
                status = "PASS" if outcome == "passed" else "FAIL"
                lines.append((props["criterion"], f"criterion {props['criterion']}: {status}"
                              f"  {props.get('title', '')}  {props.get('detail', '')}".rstrip()))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
