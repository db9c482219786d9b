"""Acceptance criteria 1–11 on the reference BBO configuration.

Each test prints one PASS/FAIL line plus its measured values, whether or
not pytest captures output.  The full-size maps take minutes each; they are
computed once per module and shared.
"""

import pytest

from besselspdc.acceptance import CRITERIA, Context, result_dict

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def ctx():
    return Context()


def _report(r, capsys):
    d = result_dict(r)  # plain Python values
    with capsys.disabled():
        print()
        print(r.line())
        for name, c in d["checks"].items():
            print(f"    {'ok  ' if c['passed'] else 'FAIL'} {name}: measured {c['measured']!r}, "
                  f"target {c['target']!r}")
        for name, value in d["info"].items():
            print(f"    info {name}: {value!r}")


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, ctx, capsys):
    r = CRITERIA[number](ctx)
    _report(r, capsys)
    assert r.passed, r.line()
