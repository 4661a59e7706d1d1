"""Acceptance criteria: one PASS/FAIL line per criterion, timed against its budget.

Run standalone with ``python tests/test_acceptance.py`` or through pytest, which
prints the lines in a terminal summary section.
"""

import sys

import pytest

from qilab.acceptance import SUITE, run_criterion

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # standalone run outside the tests directory
    ACCEPTANCE_LINES = []

# The first listed Cadney functional is negative on the Cadney vector itself, so the
# "passes all four gaps" clause cannot hold; see the decisions ledger.
KNOWN_FAILURES = {3: "first listed Cadney functional evaluates to -4 on the Cadney vector"}


def _params():
    for ident, title, _, _ in SUITE:
        marks = [pytest.mark.xfail(strict=True, reason=KNOWN_FAILURES[ident])] if ident in KNOWN_FAILURES else []
        yield pytest.param(ident, id=f"{ident:02d}-{title.replace(' ', '_')}", marks=marks)


@pytest.mark.parametrize("ident", list(_params()))
def test_criterion(ident):
    result = run_criterion(ident, seed=1)
    line = result.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    print(result.detail)
    assert result.passed, result.detail


def main() -> int:
    failed = 0
    for ident, *_ in SUITE:
        r = run_criterion(ident, seed=1)
        print(r.line())
        failed += not r.passed
    print(f"{len(SUITE) - failed}/{len(SUITE)} criteria passed")
    return 0 if failed == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
