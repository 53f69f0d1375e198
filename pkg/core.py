import os
import sys
import json
import argparse
from dataclasses import dataclass
from functools import lru_cache

now_dir = os.getcwd()
sys.path.append(now_dir)

from ffcubic.lib.characters import KUMMER, NONKUMMER, SETTINGS, CubicCharacter, omega_iso
from ffcubic.lib.cyclotomic import embed_complex
from ffcubic.lib.ffpoly import Poly, field_from_q, quadratic_extension
from ffcubic.lib.gauss import gauss_sum_definitional, root_number
from ffcubic.lib.lfunctions import direct_central_value, l_polynomial
from ffcubic.lib.utils import BudgetExceeded, dump_json
from ffcubic.metaplectic.residues import rho
from ffcubic.moments.constants import (
    a_nk_closed_form,
    constants_kummer,
    kummer_count_constants,
    kummer_main_term,
    knk_equals_ank_check,
    knk_product,
    nonkummer_count_constant,
    nonkummer_main_term,
)
from ffcubic.moments.counting import count_primitive
from ffcubic.moments.moment import brute_force_moment, omega_invariance_check, write_moment_report
from ffcubic.verify.verify import SUITES, SuiteOptions, run_suite, write_ledger

QUERY_OBJECTS = ("lpoly", "gauss-sum", "rho", "character-count")


@lru_cache(maxsize=1)
def get_config():
    from ffcubic.configs.config import Config

    return Config()


@dataclass
class RunConfig:
    command: str
    q: int
    setting: str = None
    g: int = None
    threads: int = None
    output_dir: str = None
    budget_ops: float = None

    def validate(self):
        """Field of size q, after checking that q fits the command's setting."""
        field = field_from_q(self.q)
        if self.setting is None:
            self.setting = KUMMER if self.q % 3 == 1 else NONKUMMER
        if self.setting not in SETTINGS:
            raise ValueError(f"Unknown setting {self.setting!r}.")
        if self.setting == KUMMER and self.q % 3 != 1:
            raise ValueError(f"The Kummer setting needs q = 1 mod 3, got q = {self.q}.")
        if self.setting == NONKUMMER and self.q % 3 != 2:
            raise ValueError(f"The non-Kummer setting needs q = 2 mod 3, got q = {self.q}.")
        if self.g is not None and self.g < 2:
            raise ValueError(f"Genus must be at least 2, got {self.g}.")
        if self.budget_ops is not None and self.budget_ops <= 0:
            raise ValueError("Budget must be positive.")
        self.threads = get_config().resolve_threads(self.threads)
        self.output_dir = self.output_dir or get_config().output_dir
        return field


def _dumps(data):
    return json.dumps(data, indent=4, sort_keys=True)


# Verify
def run_verify_script(
    suite: str,
    q: int,
    max_degree: int = None,
    max_genus: int = None,
    truncation: int = None,
    limit: int = None,
    output_dir: str = None,
):
    run_config = RunConfig("verify", q, output_dir=output_dir)
    field = run_config.validate()
    options = SuiteOptions(max_degree, max_genus, truncation, limit)
    ledger = run_suite(suite, field, options)
    path = write_ledger(ledger, run_config.output_dir)
    message = f"Suite {suite} {'passed' if ledger.passed else 'FAILED'}; ledger saved to {path}."
    print(message)
    return ledger.passed, message


# Moment
def run_moment_script(
    q: int,
    g: int,
    setting: str,
    afe_split: int = None,
    threads: int = None,
    checkpoint_dir: str = None,
    resume: bool = False,
    budget_ops: float = None,
    shard_size: int = None,
    output_dir: str = None,
    omega_check: bool = False,
):
    run_config = RunConfig("moment", q, setting, g, threads, output_dir, budget_ops)
    field = run_config.validate()
    report = brute_force_moment(
        field,
        g,
        setting,
        afe_split=afe_split,
        threads=run_config.threads,
        checkpoint_dir=checkpoint_dir,
        resume=resume,
        budget_ops=budget_ops,
        shard_size=shard_size,
    )
    path, golden = write_moment_report(report, run_config.output_dir)
    message = (
        f"Moment {setting} q = {q} g = {g}: {report.character_count} characters, "
        f"relative error {report.relative_error:.6g}; report saved to {path} (golden {golden})."
    )
    if omega_check:
        ok, _ = omega_invariance_check(
            field, g, setting, report=report, afe_split=afe_split, threads=run_config.threads
        )
        message += f" Omega invariance {'holds' if ok else 'FAILS'}."
    print(message)
    return message


# Query
def _character_from_literals(field, values):
    if field.q % 3 == 1:
        if len(values) != 2:
            raise ValueError("A Kummer character needs two literals F1 F2.")
        F1, F2 = (Poly.parse(value, field) for value in values)
        return CubicCharacter(KUMMER, field, F1=F1, F2=F2)
    if len(values) != 1:
        raise ValueError("A non-Kummer character needs one literal F over F_{q^2}.")
    big = quadratic_extension(field).big
    return CubicCharacter(NONKUMMER, field, F=Poly.parse(values[0], big))


def run_query_script(object_name: str, values: list, q: int):
    field = RunConfig("query", q).validate()
    if object_name == "lpoly":
        character = _character_from_literals(field, values)
        record = {
            "character": character.descriptor(),
            "lpoly": l_polynomial(character).to_json(),
            "root_number": root_number(character).value.serialize(),
            "central_value": direct_central_value(character).to_json(),
        }
    elif object_name == "gauss-sum":
        if len(values) != 2:
            raise ValueError("gauss-sum needs two literals V f.")
        if q % 3 != 1:
            raise ValueError(f"Gauss sums over F_{q} need q = 1 mod 3.")
        V, f = (Poly.parse(value, field) for value in values)
        value = gauss_sum_definitional(omega_iso(field), V, f)
        record = {
            "V": V.to_text(),
            "f": f.to_text(),
            "exact": value.serialize(),
            "complex": embed_complex(value).to_json(),
        }
    elif object_name == "rho":
        if len(values) != 2:
            raise ValueError("rho needs a literal f and an integer i.")
        if q % 6 != 1:
            raise ValueError(f"Residues need q = 1 mod 6, got q = {q}.")
        record = rho(omega_iso(field), Poly.parse(values[0], field), int(values[1])).to_json()
    elif object_name == "character-count":
        if len(values) != 1:
            raise ValueError("character-count needs a conductor degree d.")
        setting = KUMMER if q % 3 == 1 else NONKUMMER
        record = count_primitive(field, setting, int(values[0])).to_json()
    else:
        raise ValueError(f"Unknown query object {object_name!r}.")
    message = _dumps(record)
    print(message)
    return message


# Constants
def run_constants_script(q: int, g: int, output_dir: str = None):
    run_config = RunConfig("constants", q, g=g, output_dir=output_dir)
    run_config.validate()
    if run_config.setting == KUMMER:
        constants = constants_kummer(q, g)
        B1, B2 = kummer_count_constants(q)
        record = {
            **constants.to_json(),
            "count_B1": B1.to_json(),
            "count_B2": B2.to_json(),
            "main_term": kummer_main_term(q, g, constants).to_json(),
        }
    else:
        record = {
            "q": q,
            "g": g,
            "count_constant": nonkummer_count_constant(q).to_json(),
            "A_nK_3/2": a_nk_closed_form(q, "3/2").evaluate().to_json(),
            "A_nK_1": a_nk_closed_form(q, "1").evaluate().to_json(),
            "K_nK": knk_product(q).evaluate().to_json(),
            "K_nK_equals_A_nK": knk_equals_ank_check(q),
            "main_term": nonkummer_main_term(q, g).to_json(),
        }
    path = os.path.join(run_config.output_dir, f"constants_{run_config.setting}_q{q}_g{g}.json")
    dump_json(path, record)
    message = _dumps(record)
    print(message)
    print(f"Constants saved to {path}.")
    return message


# Parse arguments
def parse_arguments():
    parser = argparse.ArgumentParser(
        description="Exact cubic-character computations over F_q[T]."
    )
    subparsers = parser.add_subparsers(
        title="subcommands", dest="mode", help="Choose a mode"
    )

    # Parser for 'verify' mode
    verify_parser = subparsers.add_parser("verify", help="Run a verification suite")
    verify_parser.add_argument("suite", choices=list(SUITES), help="Suite to run.")
    verify_parser.add_argument("--q", type=int, required=True, help="Field size.")
    verify_parser.add_argument(
        "--degree", type=int, default=None, help="Largest modulus degree in the suite grid."
    )
    verify_parser.add_argument(
        "--genus", type=int, default=None, help="Largest genus for the L-function suites."
    )
    verify_parser.add_argument(
        "--truncation", type=int, default=None, help="Series truncation N for metaplectic checks."
    )
    verify_parser.add_argument(
        "--limit", type=int, default=None, help="Sample size per degree above the exhaustive range."
    )
    verify_parser.add_argument("--output-dir", type=str, default=None, help="Ledger directory.")

    # Parser for 'moment' mode
    moment_parser = subparsers.add_parser("moment", help="Brute-force first moment")
    moment_parser.add_argument("--q", type=int, required=True, help="Field size.")
    moment_parser.add_argument("--g", type=int, required=True, help="Genus of the family.")
    moment_parser.add_argument(
        "--setting", type=str, choices=list(SETTINGS), required=True, help="Character family."
    )
    moment_parser.add_argument(
        "--afe-split", type=int, default=None, help="Split A of the approximate functional equation."
    )
    moment_parser.add_argument(
        "--threads", type=int, default=None, help="Worker processes; defaults to the env variable."
    )
    moment_parser.add_argument(
        "--checkpoint-dir", type=str, default=None, help="Directory for shard checkpoints."
    )
    moment_parser.add_argument(
        "--resume", action="store_true", help="Resume from the checkpoints in --checkpoint-dir."
    )
    moment_parser.add_argument(
        "--budget-ops", type=float, default=None, help="Work budget in field operations."
    )
    moment_parser.add_argument(
        "--shard-size", type=int, default=None, help="Characters per checkpoint shard."
    )
    moment_parser.add_argument("--output-dir", type=str, default=None, help="Report directory.")
    moment_parser.add_argument(
        "--omega-check", action="store_true", help="Also rerun under the conjugate Omega."
    )

    # Parser for 'query' mode
    query_parser = subparsers.add_parser("query", help="Compute a single object")
    query_parser.add_argument("object", choices=QUERY_OBJECTS, help="Object to compute.")
    query_parser.add_argument("values", nargs="*", help="Polynomial literals and integers.")
    query_parser.add_argument("--q", type=int, required=True, help="Field size.")

    # Parser for 'constants' mode
    constants_parser = subparsers.add_parser("constants", help="Euler-product constants")
    constants_parser.add_argument("--q", type=int, required=True, help="Field size.")
    constants_parser.add_argument("--g", type=int, default=2, help="Genus for the main term.")
    constants_parser.add_argument("--output-dir", type=str, default=None, help="Output directory.")

    return parser.parse_args()


def main():
    if len(sys.argv) == 1:
        print("Please run the script with '-h' for more information.")
        sys.exit(1)

    args = parse_arguments()

    try:
        if args.mode == "verify":
            passed, _ = run_verify_script(
                suite=args.suite,
                q=args.q,
                max_degree=args.degree,
                max_genus=args.genus,
                truncation=args.truncation,
                limit=args.limit,
                output_dir=args.output_dir,
            )
            if not passed:
                sys.exit(1)
        elif args.mode == "moment":
            run_moment_script(
                q=args.q,
                g=args.g,
                setting=args.setting,
                afe_split=args.afe_split,
                threads=args.threads,
                checkpoint_dir=args.checkpoint_dir,
                resume=args.resume,
                budget_ops=args.budget_ops,
                shard_size=args.shard_size,
                output_dir=args.output_dir,
                omega_check=args.omega_check,
            )
        elif args.mode == "query":
            run_query_script(object_name=args.object, values=args.values, q=args.q)
        elif args.mode == "constants":
            run_constants_script(q=args.q, g=args.g, output_dir=args.output_dir)
    except ValueError as error:
        print(f"Invalid configuration: {error}")
        sys.exit(2)
    except BudgetExceeded as error:
        print(f"Budget exceeded: {error}")
        print(f"Completed shards: {len(error.completed)}; remaining: {len(error.remaining)}.")
        sys.exit(3)
    except Exception as error:
        print(f"An error occurred during execution: {error}")

        import traceback

        traceback.print_exc()
        sys.exit(1)


if __name__ == "__main__":
    main()
