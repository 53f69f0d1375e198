import os
import time
import logging
import concurrent.futures
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from tqdm import tqdm

from ffcubic.configs.config import Config
from ffcubic.lib.characters import (
    KUMMER,
    NONKUMMER,
    SETTINGS,
    CubicCharacter,
    kummer_blocks,
    kummer_pairs,
    nonkummer_indices,
)
from ffcubic.lib.cyclotomic import ComplexApprox, CycNum, HalfPowNum, embed_complex
from ffcubic.lib.ffpoly import Poly, field_spec, quadratic_extension
from ffcubic.lib.lfunctions import afe_value, direct_central_value
from ffcubic.lib.utils import (
    BudgetExceeded,
    ConsistencyError,
    append_csv_row,
    dump_json,
    format_duration,
    load_json,
)
from ffcubic.moments.constants import kummer_main_term, nonkummer_main_term, nonkummer_secondary_term
from ffcubic.moments.counting import count_restriction_class, exact_count

logger = logging.getLogger(__name__)

config = Config()

CSV_HEADER = ("q", "g", "count", "exact_real", "main", "rel_err")


@dataclass(frozen=True)
class Shard:
    """A slice of one (d1, d2) block; non-Kummer families are the single block (g/2 + 1, 0)."""

    d1: int
    d2: int
    k: int
    items: tuple

    @property
    def key(self):
        return f"shard_{self.d1}_{self.d2}_{self.k}"


@dataclass
class MomentReport:
    setting: str
    q: int
    g: int
    exact_moment: HalfPowNum
    main_term: ComplexApprox
    relative_error: float
    character_count: int
    afe_split: int
    conjugate: bool = False
    blocks: dict = dataclass_field(default_factory=dict)
    secondary_term: ComplexApprox = None
    afe_dual_empty: bool = False
    runtime: dict = dataclass_field(default_factory=dict)

    @property
    def exact_complex(self):
        return embed_complex(self.exact_moment)

    def to_json(self):
        out = {
            "setting": self.setting,
            "q": self.q,
            "g": self.g,
            "exact_moment": self.exact_moment.serialize(),
            "exact_complex": self.exact_complex.to_json(),
            "main_term": self.main_term.to_json(),
            "relative_error": self.relative_error,
            "character_count": self.character_count,
            "afe_split": self.afe_split,
            "conjugate": self.conjugate,
            "blocks": {key: self.blocks[key] for key in sorted(self.blocks)},
            "afe_dual_empty": self.afe_dual_empty,
        }
        if self.secondary_term is not None:
            out["secondary_term"] = self.secondary_term.to_json()
        return out

    @property
    def stem(self):
        return f"moment_{self.setting}_q{self.q}_g{self.g}"

    @property
    def golden_key(self):
        return f"{self.setting}_q{self.q}_g{self.g}"


def _check_family(field, g, setting):
    if setting not in SETTINGS:
        raise ValueError(f"Unknown setting {setting!r}.")
    if setting == KUMMER and field.q % 3 != 1:
        raise ValueError(f"Kummer moments need q = 1 mod 3, got q = {field.q}.")
    if setting == NONKUMMER and field.q % 3 != 2:
        raise ValueError(f"Non-Kummer moments need q = 2 mod 3, got q = {field.q}.")
    if g < 2:
        raise ValueError(f"Moments are computed for genus g >= 2, got {g}.")


def conductor_degree(g, setting):
    return g + 2 if setting == NONKUMMER else g + 1


def character_cost(q, g, setting):
    """Projected work for one central value: one pass over the monic polynomials below deg h."""
    return q ** conductor_degree(g, setting)


def plan_shards(field, g, setting, shard_size=None):
    shard_size = config.shard_size if shard_size is None else shard_size
    if shard_size < 1:
        raise ValueError(f"Shard size must be positive, got {shard_size}.")
    if setting == KUMMER:
        blocks = [(d1, d2, kummer_pairs(field, d1, d2)) for d1, d2 in kummer_blocks(g)]
    elif g % 2:
        blocks = []
    else:
        d = g // 2 + 1
        blocks = [(d, 0, nonkummer_indices(field, d))]
    shards = []
    for d1, d2, items in blocks:
        for k, start in enumerate(range(0, len(items), shard_size)):
            shards.append(Shard(d1, d2, k, tuple(items[start : start + shard_size])))
    return shards


def build_character(field, setting, shard, item, conjugate=False):
    if setting == KUMMER:
        i1, i2 = item
        return CubicCharacter(
            KUMMER,
            field,
            F1=Poly.from_monic_index(field, shard.d1, i1),
            F2=Poly.from_monic_index(field, shard.d2, i2),
            conjugate=conjugate,
        )
    big = quadratic_extension(field).big
    return CubicCharacter(
        NONKUMMER, field, F=Poly.from_monic_index(big, shard.d1, item), conjugate=conjugate
    )


def _zero(q):
    return HalfPowNum(q, CycNum.zero(3))


def shard_total(task):
    setting, p, n, A, conjugate, shard = task
    field = field_spec(p, n)
    total = _zero(field.q)
    for item in shard.items:
        character = build_character(field, setting, shard, item, conjugate)
        total = total + afe_value(character, A).value
    return shard.key, len(shard.items), total.serialize()


def _manifest(field, g, setting, A, conjugate, shards):
    return {
        "setting": setting,
        "q": field.q,
        "g": g,
        "afe_split": A,
        "conjugate": conjugate,
        "shards": {shard.key: len(shard.items) for shard in shards},
    }


def _load_checkpoints(checkpoint_dir, manifest, resume):
    manifest_path = os.path.join(checkpoint_dir, "manifest.json")
    done = {}
    if resume:
        previous = load_json(manifest_path)
        if previous and previous != manifest:
            raise ValueError(f"Checkpoint manifest in {checkpoint_dir} belongs to a different run.")
        for key in manifest["shards"]:
            record = load_json(os.path.join(checkpoint_dir, f"{key}.json"))
            if record:
                done[key] = (record["count"], record["total"])
    dump_json(manifest_path, manifest)
    return done


def _write_shard(checkpoint_dir, key, count, total):
    if checkpoint_dir:
        dump_json(os.path.join(checkpoint_dir, f"{key}.json"), {"key": key, "count": count, "total": total})


def _run_shards(tasks, threads, checkpoint_dir, results):
    if not tasks:
        return
    with tqdm(total=len(tasks)) as pbar:
        if threads == 1:
            for task in tasks:
                key, count, total = shard_total(task)
                results[key] = (count, total)
                _write_shard(checkpoint_dir, key, count, total)
                pbar.update(1)
            return
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as executor:
            futures = [executor.submit(shard_total, task) for task in tasks]
            for future in concurrent.futures.as_completed(futures):
                key, count, total = future.result()
                results[key] = (count, total)
                _write_shard(checkpoint_dir, key, count, total)
                pbar.update(1)


def _sample_positions(count, k):
    if count == 0 or k <= 0:
        return []
    return sorted(set(np.linspace(0, count - 1, min(k, count)).astype(int).tolist()))


def spot_check(field, setting, shards, A, conjugate=False, k=None):
    """Direct central value against the AFE value on a deterministic sample of characters."""
    k = config.spot_checks if k is None else k
    flat = [(shard, item) for shard in shards for item in shard.items]
    positions = _sample_positions(len(flat), k)
    for position in positions:
        shard, item = flat[position]
        character = build_character(field, setting, shard, item, conjugate)
        direct = direct_central_value(character).value
        split = afe_value(character, A).value
        if direct != split:
            raise ConsistencyError(
                f"AFE value {split} differs from the direct value {direct} for {character.descriptor()}."
            )
    return len(positions)


def _family_count_check(field, g, setting, count):
    d = conductor_degree(g, setting)
    expected = count_restriction_class(field, d, 1) if setting == KUMMER else exact_count(field, setting, d)
    if count != expected:
        raise ConsistencyError(f"Enumerated {count} characters but the count gives {expected}.")


def brute_force_moment(
    field,
    g,
    setting,
    afe_split=None,
    threads=None,
    checkpoint_dir=None,
    resume=False,
    budget_ops=None,
    conjugate=False,
    shard_size=None,
    spot_checks=None,
):
    """Exact sum of L(1/2, chi) over the genus-g family, compared with its main term."""
    _check_family(field, g, setting)
    q = field.q
    A = g // 2 if afe_split is None else afe_split
    if not 0 <= A <= g:
        raise ValueError(f"AFE split A = {A} is outside [0, {g}].")
    threads = config.resolve_threads(threads)
    budget_ops = config.budget_ops if budget_ops is None else budget_ops
    start_time = time.time()

    shards = plan_shards(field, g, setting, shard_size)
    manifest = _manifest(field, g, setting, A, conjugate, shards)
    results = _load_checkpoints(checkpoint_dir, manifest, resume) if checkpoint_dir else {}
    pending = [shard for shard in shards if shard.key not in results]

    cost = character_cost(q, g, setting)
    scheduled, spent = [], 0
    for shard in pending:
        shard_cost = cost * len(shard.items)
        if spent + shard_cost > budget_ops:
            break
        scheduled.append(shard)
        spent += shard_cost
    print(
        f"Starting {setting} moment q = {q}, g = {g} with {threads} processes: "
        f"{len(shards)} shards, {len(results)} from checkpoints, {len(scheduled)} scheduled."
    )
    p, n = field.p, field.n
    tasks = [(setting, p, n, A, conjugate, shard) for shard in scheduled]
    _run_shards(tasks, threads, checkpoint_dir, results)

    remaining = [shard.key for shard in pending[len(scheduled) :]]
    if remaining:
        raise BudgetExceeded(
            f"Projected work for the remaining {len(remaining)} shards exceeds the budget of "
            f"{budget_ops:.3g} operations.",
            completed=sorted(results),
            remaining=remaining,
        )

    total = _zero(q)
    blocks = {}
    count = 0
    for key in sorted(results):
        shard_count, shard_sum = results[key]
        total = total + HalfPowNum.parse(shard_sum)
        count += shard_count
        block = key.rsplit("_", 1)[0]
        blocks[block] = blocks.get(block, 0) + shard_count
    _family_count_check(field, g, setting, count)
    spot_check(field, setting, shards, A, conjugate, spot_checks)

    exact = embed_complex(total)
    if setting == NONKUMMER and abs(exact.im) > exact.err + 1e-9 * max(1.0, abs(exact)):
        raise ConsistencyError(f"Non-Kummer moment {exact} is not real.")
    if setting == NONKUMMER:
        main = nonkummer_main_term(q, g) if count else ComplexApprox(0.0)
        secondary = nonkummer_secondary_term(q, g, A) if count else None
    else:
        main = kummer_main_term(q, g)
        secondary = None
    relative_error = abs(exact.re - main.re) / abs(main.re) if main.re else 0.0
    if g - A == 0:
        logger.warning("AFE split A = g leaves the dual sum empty for g = %d.", g)

    elapsed_time = time.time() - start_time
    print(f"Moment q = {q}, g = {g} completed in {format_duration(elapsed_time)} over {count} characters.")
    return MomentReport(
        setting=setting,
        q=q,
        g=g,
        exact_moment=total,
        main_term=main,
        relative_error=relative_error,
        character_count=count,
        afe_split=A,
        conjugate=conjugate,
        blocks=blocks,
        secondary_term=secondary,
        afe_dual_empty=g - A == 0,
        runtime={"elapsed_seconds": elapsed_time, "threads": threads},
    )


def check_golden(report, output_dir):
    """Store the exact moment on the first run of (setting, q, g) and compare on later runs."""
    path = os.path.join(output_dir, "goldens.json")
    goldens = load_json(path)
    value = report.exact_moment.serialize()
    stored = goldens.get(report.golden_key)
    if stored is None:
        goldens[report.golden_key] = value
        dump_json(path, goldens)
        return "stored"
    if HalfPowNum.parse(stored) != report.exact_moment:
        raise ConsistencyError(f"Moment {report.golden_key} = {value} differs from the golden {stored}.")
    return "matched"


def write_moment_report(report, output_dir=None):
    output_dir = output_dir or config.output_dir
    report_path = os.path.join(output_dir, f"{report.stem}.json")
    dump_json(report_path, report.to_json())
    dump_json(os.path.join(output_dir, f"{report.stem}.runtime.json"), report.runtime)
    append_csv_row(
        os.path.join(output_dir, "moments.csv"),
        CSV_HEADER,
        (
            report.q,
            report.g,
            report.character_count,
            repr(report.exact_complex.re),
            repr(report.main_term.re),
            repr(report.relative_error),
        ),
    )
    golden = None if report.conjugate else check_golden(report, output_dir)
    return report_path, golden


def omega_invariance_check(field, g, setting, report=None, **kwargs):
    """Moment under the conjugate choice of Omega against the canonical one, as real numbers."""
    report = report or brute_force_moment(field, g, setting, **kwargs)
    kwargs.pop("checkpoint_dir", None)
    kwargs.pop("resume", None)
    other = brute_force_moment(field, g, setting, conjugate=not report.conjugate, **kwargs)
    a, b = report.exact_complex, other.exact_complex
    ok = abs(a.re - b.re) <= a.err + b.err + 1e-9 * max(1.0, abs(a))
    if not ok:
        logger.warning("Moment depends on Omega: %s vs %s", a, b)
    return ok, other
