"""Acceptance criteria 1-10, one test each; a PASS/FAIL line per criterion is
printed in the terminal summary (and by running this file directly)."""
import pytest

from eocloak import validation

ACCEPTANCE_LINES = []


@pytest.mark.parametrize("check", validation.FULL_CHECKS, ids=lambda f: f"criterion_{f.__name__.split('_')[1]}")
def test_criterion(check):
    result = check()
    ACCEPTANCE_LINES.append(result.line())
    assert result.passed, result.line()


if __name__ == "__main__":
    for r in validation.run_full():
        print(r.line())
