"""Acceptance criteria, one test each.

Every criterion is a registered check (see ``reflectlax.checks``); a test
passes when every row of its check is within tolerance, no library error
was raised and the wall time stays under the check's limit.  One
``PASS``/``FAIL`` line per criterion is printed even under output capture.

Run directly (``python3 tests/test_acceptance.py``) for the summary alone.
"""

import sys

import pytest

from reflectlax.checks import CHECKS, run_checks

SEED = 0

CRITERIA = [
    (1, "cre_certification"),
    (2, "cybe_mcybe"),
    (3, "coideal_equivalence"),
    (4, "toda_commutativity"),
    (5, "toda_factorization"),
    (6, "toda_isospectrality"),
    (7, "xxz_laurent"),
    (8, "xxz_reflection_algebra"),
    (9, "xxz_transfer_commutativity"),
    (10, "xxz_local_hamiltonian"),
    (11, "semiclassical_limit"),
]


def evaluate(name):
    report = run_checks([name], SEED)
    elapsed = report.timings[name]
    limit = CHECKS[name].time_limit
    ok = report.passed and elapsed <= limit
    failing = [r for r in report.checks if not r.passed]
    parts = [f"{r.name}={r.defect:.2e}>{r.tolerance:.0e}" + (f" ({r.detail})" if r.detail else "")
             for r in failing]
    parts += [f"error {msg}" for msg in report.errors.values()]
    if elapsed > limit:
        parts.append(f"over time limit {limit:g}s")
    worst = max((r.defect / r.tolerance if r.tolerance else r.defect for r in report.checks), default=0.0)
    return ok, elapsed, worst, parts, report


def summary_line(number, name, ok, elapsed, worst, parts):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}  {name:28s} {elapsed:7.2f}s  worst defect/tol {worst:.2e}"
    return line + ("  [" + "; ".join(parts) + "]" if parts else "")


@pytest.mark.parametrize("number,name", CRITERIA, ids=[f"c{n:02d}_{name}" for n, name in CRITERIA])
def test_criterion(number, name, capsys):
    ok, elapsed, worst, parts, report = evaluate(name)
    with capsys.disabled():
        print("\n" + summary_line(number, name, ok, elapsed, worst, parts))
    for row in report.checks:
        assert row.passed, f"{row.name}: defect {row.defect!r} > tolerance {row.tolerance!r} ({row.detail})"
    assert not report.errors, report.errors
    assert elapsed <= CHECKS[name].time_limit


if __name__ == "__main__":
    results = [(n, name, *evaluate(name)[:4]) for n, name in CRITERIA]
    for n, name, ok, elapsed, worst, parts in results:
        print(summary_line(n, name, ok, elapsed, worst, parts))
    sys.exit(0 if all(r[2] for r in results) else 1)
