"""Acceptance battery: every criterion at its stated tolerance.

The battery itself lives in rollmono.acceptance (shared with the CLI
`reproduce` subcommand); here each criterion is asserted individually and
its pass/fail line is printed.
"""
import os

import pytest

from rollmono import acceptance

IDS = [ident for ident, _, _ in acceptance.CRITERIA]


@pytest.fixture(scope="module")
def battery():
    workers = max(1, min(4, os.cpu_count() or 1))
    results = acceptance.run_all(workers=workers)
    return {r.ident: r for r in results}


@pytest.mark.parametrize("ident", IDS)
def test_criterion(battery, ident):
    result = battery[ident]
    print(acceptance.format_result(result))
    assert result.passed, acceptance.format_result(result)
