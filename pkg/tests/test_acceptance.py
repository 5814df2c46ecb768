"""Acceptance gate: every shipped criterion must pass at its stated tolerance.

Each criterion prints one PASS/FAIL line with its measured numbers, so a
full run doubles as a scoreboard.  A raised exception inside a criterion is
reported as a failure, never as a skip.
"""

import pytest

from glsim import run_criterion


@pytest.mark.parametrize("cid", [str(k) for k in range(1, 12)])
def test_criterion(cid):
    result = run_criterion(cid)
    print(result.line)
    assert result.passed, result.details
