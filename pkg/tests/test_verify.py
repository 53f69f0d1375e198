import pytest

from ffcubic.lib.ffpoly import Poly, enumerate_monic, field_spec, is_irreducible
from ffcubic.lib.utils import ConsistencyError, DegreeCapExceeded, load_json
from ffcubic.verify.verify import FAILED, PASSED, SKIPPED, Ledger, SuiteOptions, run_suite, write_ledger


@pytest.fixture(scope="module")
def f5():
    return field_spec(5)


@pytest.fixture(scope="module")
def f7():
    return field_spec(7)


def _raise(error):
    def run():
        raise error

    return run


def test_ledger_statuses():
    ledger = Ledger("demo", 7)
    ledger.record("b equal", "x = x", lambda: (1, 1))
    ledger.record("a unequal", "x = y", lambda: (1, 2))
    ledger.record("c capped", "deep", _raise(DegreeCapExceeded(9, 7)))
    ledger.record("d broken", "routes", _raise(ConsistencyError("routes disagree")))
    ledger.record("e bool", "flag", lambda: True)
    assert ledger.counts() == {PASSED: 2, FAILED: 2, SKIPPED: 1}
    assert not ledger.passed
    checks = ledger.to_json()["checks"]
    assert [check["check"] for check in checks] == sorted(check["check"] for check in checks)
    assert checks[0]["residual"] == "1 != 2"


def test_skipped_checks_do_not_fail_the_suite():
    ledger = Ledger("demo", 7)
    ledger.record("capped", "deep", _raise(DegreeCapExceeded(9, 7)))
    assert ledger.passed


def test_unknown_suite(f7):
    with pytest.raises(ValueError):
        run_suite("nothing", f7)


def test_suites_check_q(f5, f7):
    with pytest.raises(ValueError):
        run_suite("gauss", f5)
    with pytest.raises(ValueError):
        run_suite("knk", f7)


def test_sieve_suite(f7, tmp_path):
    ledger = run_suite("sieve", f7)
    assert ledger.passed
    assert ledger.counts()[PASSED] == 12
    path = write_ledger(ledger, str(tmp_path))
    assert path.endswith("verify_sieve_q7.json")
    data = load_json(path)
    assert data["suite"] == "sieve"
    assert data["passed"]


@pytest.mark.parametrize("q", [5, 7])
def test_counts_suite(q):
    ledger = run_suite("counts", field_spec(q))
    assert ledger.passed
    assert ledger.counts()[FAILED] == 0


def test_knk_suite(f5):
    ledger = run_suite("knk", f5)
    assert ledger.passed


def test_reciprocity_suite(f7):
    ledger = run_suite("reciprocity", f7, SuiteOptions(max_degree=2))
    assert ledger.passed


def test_lfunction_suites(f5):
    assert run_suite("lfunc-fe", f5).passed
    assert run_suite("afe", f5).passed


def test_required_check_fails_at_the_cap():
    ledger = Ledger("demo", 7)
    ledger.record("capped", "deep", _raise(DegreeCapExceeded(9, 7)), required=True)
    assert not ledger.passed
    assert ledger.records[0].residual.startswith("not reached")


def test_residue_suite_reaches_quadratic_primes(f7):
    ledger = run_suite("residues", f7)
    assert ledger.passed
    assert ledger.counts() == {PASSED: 40, FAILED: 0, SKIPPED: 0}
    names = [record.check for record in ledger.records]
    T = Poly.T(f7)
    quadratic = next(P for P in enumerate_monic(f7, 2) if is_irreducible(P))

    def explicit(f):
        return sum(name.startswith(f"explicit residue f = {f.to_text()},") for name in names)

    assert explicit(quadratic) == 3
    assert explicit(quadratic**2) == 2
    assert explicit(quadratic * T) == 3
    assert explicit(quadratic**3) == 0
    assert sum(name.startswith("patterson") and f"pi = {quadratic.to_text()}," in name for name in names) == 6
    assert f"periodicity pi = {T.to_text()}, j = 1, i = 1" in names



def test_lfunction_suite_cross_checks_kummer_root_numbers(f7):
    ledger = run_suite("lfunc-fe", f7, SuiteOptions(max_genus=2))
    assert ledger.passed
    assert ledger.counts() == {PASSED: 5 * 252, FAILED: 0, SKIPPED: 0}
    names = {record.check.split(" F1")[0] for record in ledger.records}
    assert names == {
        "root number unit",
        "gauss sum factorization",
        "weil bound",
        "root number signatures",
        "functional equation",
    }
