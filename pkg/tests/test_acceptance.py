"""Acceptance criteria 1 to 11, one test each.

Each test prints a single PASS/FAIL line (visible with ``pytest -s`` and in
``-v`` output on failure) and then asserts the criterion.  Nothing is
relaxed here: a criterion that cannot be met at the stated tolerance fails.
"""

import pytest

from bfree.verification import ACCEPTANCE


@pytest.mark.acceptance
@pytest.mark.parametrize("number", range(1, len(ACCEPTANCE) + 1),
                         ids=[f"criterion_{i}" for i in range(1, len(ACCEPTANCE) + 1)])
def test_criterion(number):
    check = ACCEPTANCE[number - 1]()
    print(check.line())
    assert check.passed, check.line()
