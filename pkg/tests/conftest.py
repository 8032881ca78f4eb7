import itertools
from fractions import Fraction

import numpy as np
import pytest

ACCEPTANCE_LINES = []


def brute_partitions(items):
    """All set partitions of ``items`` by recursion; independent of the RGS code."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in brute_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def bell_by_binomial(n):
    """B(m+1) = sum_k C(m, k) B(k)."""
    from math import comb
    bell = [1]
    for m in range(n):
        bell.append(sum(comb(m, k) * bell[k] for k in range(m + 1)))
    return bell[n]


def stirling_first_unsigned(n):
    """Row ``|s(n, t)|`` for t = 0..n via integer recurrence."""
    row = [1]
    for m in range(n):
        new = [0] * (len(row) + 1)
        for t, v in enumerate(row):
            new[t] += m * v
            new[t + 1] += v
        row = new
    return row


def crp_mass_fraction(sizes, alpha):
    """Unordered CRP mass in exact rationals (alpha rational)."""
    from math import factorial
    alpha = Fraction(alpha)
    n = sum(sizes)
    rising = Fraction(1)
    for i in range(n):
        rising *= alpha + i
    num = alpha ** len(sizes)
    for s in sizes:
        num *= factorial(s - 1)
    return num / rising


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""
    def _report(name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  [{detail}]" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
