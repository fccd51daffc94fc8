"""One test per acceptance criterion, each at its stated tolerance and time budget.

Run directly (``python tests/test_acceptance.py``) or through pytest; either
way one PASS/FAIL line is printed per criterion.
"""

import pytest

from simplexbundle.verify import CHECKS, run_checks

SEED = 42


@pytest.mark.parametrize("name", list(CHECKS))
def test_criterion(name, capsys):
    (result,) = run_checks([name], seed=SEED)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()


if __name__ == "__main__":
    for r in run_checks(seed=SEED):
        print(r.line())
