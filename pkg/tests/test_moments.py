import math
import os
from fractions import Fraction

import pytest

from ffcubic.lib.characters import KUMMER, NONKUMMER, enumerate_characters, kummer_pairs, omega_iso
from ffcubic.lib.ffpoly import Poly, field_from_q, field_spec
from ffcubic.lib.utils import BudgetExceeded, load_json
from ffcubic.moments.constants import (
    a_nk_closed_form_check,
    constant_A_nK,
    constants_kummer,
    d_k_derivative_check,
    d_k_diagonal_product,
    d_k_product,
    kummer_count_constants,
    knk_equals_ank_check,
    knk_factor_identity,
    nonkummer_main_term,
    zeta_q,
)
from ffcubic.moments.counting import count_primitive, count_restriction_class
from ffcubic.moments.moment import (
    brute_force_moment,
    omega_invariance_check,
    plan_shards,
    write_moment_report,
)
from ffcubic.moments.sieve import sieve_identity_check, sieve_lhs


@pytest.fixture(scope="module")
def f5():
    return field_spec(5)


@pytest.fixture(scope="module")
def f7():
    return field_spec(7)


@pytest.fixture(scope="module")
def iso7(f7):
    return omega_iso(f7)


def test_kummer_counts(f7):
    assert count_primitive(f7, KUMMER, 2).exact == 126
    assert count_primitive(f7, KUMMER, 4).exact == 9240


def test_nonkummer_counts(f5):
    assert count_primitive(f5, NONKUMMER, 4).exact == 480
    for d in (1, 3, 5):
        result = count_primitive(f5, NONKUMMER, d)
        assert result.exact == 0
        assert result.asymptotic == 0.0


@pytest.mark.parametrize("setting, q", [(KUMMER, 7), (NONKUMMER, 5)])
def test_count_ratio_at_degree_four(setting, q):
    result = count_primitive(field_spec(q), setting, 4)
    assert abs(result.ratio - 1) < 0.25


def test_count_settings_are_checked(f5, f7):
    with pytest.raises(ValueError):
        count_primitive(f7, NONKUMMER, 2)
    with pytest.raises(ValueError):
        count_primitive(f5, KUMMER, 2)
    with pytest.raises(ValueError):
        field_from_q(9)


def test_restriction_classes_split_the_kummer_count(f7):
    classes = [count_restriction_class(f7, 3, r) for r in range(3)]
    assert sum(classes) == count_primitive(f7, KUMMER, 3).exact
    assert classes[1] == 252
    assert len(list(enumerate_characters(f7, 2, KUMMER))) == classes[1]


def test_nonkummer_family_matches_count(f5):
    assert len(list(enumerate_characters(f5, 2, NONKUMMER))) == 480


def test_count_constants_are_positive():
    B1, B2 = kummer_count_constants(7)
    assert 0.6 < B1.re < 0.7
    assert B2.re > B1.re


def test_zeta_values():
    assert zeta_q(7, 3) == Fraction(49, 48)
    assert zeta_q(7, Fraction(3, 2)) == pytest.approx(1 / (1 - 7**-0.5))
    with pytest.raises(ValueError):
        zeta_q(7, 1)


def test_a_nk_closed_forms():
    assert a_nk_closed_form_check(5)


def test_a_nk_at_zero():
    assert constant_A_nK(5, 0.0, 0.1).close_to(1.0)


def test_a_nk_rejects_divergent_points():
    with pytest.raises(ValueError):
        constant_A_nK(5, 0.5, 0.1)
    with pytest.raises(ValueError):
        constant_A_nK(5, 0.1, 1.0)


@pytest.mark.parametrize("q", [5, 11])
def test_knk_equals_ank(q):
    assert knk_equals_ank_check(q)


@pytest.mark.parametrize("parity", ["odd", "even"])
def test_knk_factor_identity(parity):
    assert knk_factor_identity(parity)


def test_knk_needs_nonkummer_q():
    with pytest.raises(ValueError):
        knk_equals_ank_check(7)


def test_d_k_symmetry():
    for x, y in ((0.1, 0.05), (1 / 7, 0.02)):
        a = d_k_product(7, x, y, 1.0).evaluate()
        b = d_k_product(7, y, x, 1.0).evaluate()
        assert a.close_to(b, 1e-14)


def test_d_k_diagonal_matches_general():
    diagonal = d_k_diagonal_product(7, 1 / 7, 1.0).evaluate()
    general = d_k_product(7, 1 / 7, 1 / 7, 1.0).evaluate()
    assert diagonal.close_to(general, 1e-12)


@pytest.mark.parametrize("u", [1.0, math.sqrt(7)])
def test_d_k_derivative_against_difference(u):
    assert d_k_derivative_check(7, u)


def test_kummer_constants_are_real():
    constants = constants_kummer(7, 2)
    assert abs(constants.C_K1.im) < 1e-8
    assert abs(constants.C_K2.im) < 1e-8
    assert constants.C_K1.re > 0
    assert set(constants.to_json()) == {"q", "g", "C_K1", "C_K2", "D_K1", "D_K2"}


def test_nonkummer_main_term_scale():
    main = nonkummer_main_term(5, 2)
    assert 0 < main.re < 5 * 5**4


def test_sieve_trivial_character(iso7, f7):
    one = Poly.one(f7)
    assert sieve_identity_check(iso7, one, 2, 2)
    assert sieve_lhs(iso7, one, 2, 2) == len(kummer_pairs(f7, 2, 2))


def test_sieve_linear_modulus(iso7, f7):
    assert sieve_identity_check(iso7, Poly.T(f7), 2, 2)
    assert sieve_identity_check(iso7, Poly.T(f7) + 1, 1, 2)


def test_sieve_degenerate_degree(iso7, f7):
    T = Poly.T(f7)
    assert sieve_identity_check(iso7, T, 0, 2)
    assert sieve_identity_check(iso7, T, 2, 0)
    assert sieve_lhs(iso7, T, 0, 0) == 1


def test_sieve_needs_monic_modulus(iso7, f7):
    with pytest.raises(ValueError):
        sieve_identity_check(iso7, Poly(f7, (1, 2)), 1, 1)


def test_moment_needs_genus_two(f5):
    with pytest.raises(ValueError):
        brute_force_moment(f5, 1, NONKUMMER, threads=1)
    with pytest.raises(ValueError):
        brute_force_moment(f5, 2, KUMMER, threads=1)


def test_empty_nonkummer_family(f5):
    report = brute_force_moment(f5, 3, NONKUMMER, threads=1)
    assert report.character_count == 0
    assert report.exact_moment.is_zero()
    assert report.relative_error == 0.0


def test_plan_shards(f7):
    shards = plan_shards(f7, 2, KUMMER, shard_size=64)
    assert [shard.key for shard in shards] == [f"shard_2_1_{k}" for k in range(4)]
    assert sum(len(shard.items) for shard in shards) == 252


@pytest.fixture(scope="module")
def kummer_report(f7):
    return brute_force_moment(f7, 2, KUMMER, threads=1, shard_size=64, spot_checks=4)


def test_kummer_moment(kummer_report):
    assert kummer_report.character_count == 252
    assert kummer_report.blocks == {"shard_2_1": 252}
    assert kummer_report.relative_error >= 0


def test_kummer_moment_resumes_after_budget(f7, kummer_report, tmp_path):
    checkpoints = str(tmp_path / "checkpoints")
    with pytest.raises(BudgetExceeded) as info:
        brute_force_moment(
            f7, 2, KUMMER, threads=1, shard_size=64, checkpoint_dir=checkpoints, budget_ops=7**3 * 128
        )
    assert info.value.completed == ["shard_2_1_0", "shard_2_1_1"]
    assert info.value.remaining == ["shard_2_1_2", "shard_2_1_3"]
    assert set(load_json(os.path.join(checkpoints, "manifest.json"))["shards"]) == {
        f"shard_2_1_{k}" for k in range(4)
    }
    resumed = brute_force_moment(
        f7, 2, KUMMER, threads=1, shard_size=64, checkpoint_dir=checkpoints, resume=True, spot_checks=1
    )
    assert resumed.exact_moment == kummer_report.exact_moment
    assert resumed.to_json() == kummer_report.to_json()


def test_moment_is_independent_of_omega(f7, kummer_report):
    ok, other = omega_invariance_check(f7, 2, KUMMER, report=kummer_report, threads=1, spot_checks=1)
    assert ok
    assert other.conjugate


def test_nonkummer_moment_reports(f5, tmp_path):
    report = brute_force_moment(f5, 2, NONKUMMER, threads=1, spot_checks=4)
    assert report.character_count == 480
    assert abs(report.exact_complex.im) <= report.exact_complex.err + 1e-9
    assert report.secondary_term is not None
    path, golden = write_moment_report(report, str(tmp_path))
    assert golden == "stored"
    assert load_json(path)["character_count"] == 480
    assert os.path.exists(tmp_path / "moment_nonkummer_q5_g2.runtime.json")
    _, golden = write_moment_report(report, str(tmp_path))
    assert golden == "matched"
    with open(tmp_path / "moments.csv") as f:
        lines = f.read().splitlines()
    assert lines[0] == "q,g,count,exact_real,main,rel_err"
    assert len(lines) == 3


def test_moment_is_identical_across_process_counts(f7, kummer_report, tmp_path):
    checkpoints = str(tmp_path / "checkpoints")
    pooled = brute_force_moment(
        f7, 2, KUMMER, threads=4, shard_size=64, checkpoint_dir=checkpoints, spot_checks=1
    )
    assert pooled.runtime["threads"] == 4
    assert pooled.exact_moment == kummer_report.exact_moment
    assert pooled.exact_moment.serialize() == kummer_report.exact_moment.serialize()
    assert pooled.to_json() == kummer_report.to_json()
    assert sorted(os.listdir(checkpoints)) == ["manifest.json"] + [f"shard_2_1_{k}.json" for k in range(4)]


@pytest.mark.slow
def test_nonkummer_relative_error_shrinks_with_genus(f5):
    errors = [brute_force_moment(f5, g, NONKUMMER, spot_checks=2, budget_ops=math.inf).relative_error for g in (2, 4)]
    assert errors[1] < errors[0]


@pytest.mark.slow
def test_kummer_relative_error_shrinks_with_genus(f7):
    errors = [brute_force_moment(f7, g, KUMMER, spot_checks=2, budget_ops=math.inf).relative_error for g in (2, 3, 5)]
    assert errors[0] > errors[1] > errors[2]
