"""The outer attack loop: train, guess, verify, iterate.

Each epoch trains the model on fresh (or combined) samples, probes it
with the direct-recovery schedule (ten K values, six binarizations
each), runs the distinguisher once accuracy clears its trigger, and
statistically verifies every candidate.  The loop stops at the first
accepted candidate or when a budget (epochs, samples, wall clock) runs
out.  Sweeps repeat the attack over a grid of instance parameters;
tasks train models on the plain arithmetic problems without recovery.

Test mode injects any Predictor (usually ExactOracle) in place of the
trained model, exercising the full pipeline with no training; this is
part of the public surface.
"""

from __future__ import annotations

import csv
import dataclasses
import itertools
import json
import math
import time
import types
import typing
from dataclasses import dataclass, field, replace

import numpy as np

from .codec import Vocab
from .model import ModelConfig, TrainedModel
from .data import (
    LAYOUT_CIRCULANT,
    LweParams,
    SampleSet,
    combine_rows,
    gen_plain_samples,
    gen_rlwe_samples,
    gen_secret,
)
from .predictors import Predictor, acc_tau, exact_accuracy
from .recovery import (
    RecoveryConfig,
    RecoveryReport,
    binarize,
    direct_recover,
    distinguisher_recover,
    verify_secret,
)

TASK_KINDS = ("1d-modmul", "nd-uniform", "nd-binary")
OUTCOME_FULL = "full-recovery"
OUTCOME_ONES = "ones-recovered"
OUTCOME_FAILED = "failed"


@dataclass(frozen=True)
class ExperimentConfig:
    lwe: LweParams = LweParams(n=16, q=251, sigma=3.0, hamming=2)
    model: ModelConfig = ModelConfig()
    recovery: RecoveryConfig = RecoveryConfig()
    seed: int = 0
    base_in: int = 81
    base_out: int = 81
    max_epochs: int = 30
    max_samples: int | None = None
    wall_clock_s: float | None = None
    test_size: int = 10_000
    combine_k: int | None = None  # train on combined samples when set
    combine_pool: int | None = None
    combine_reuse: int = 10
    sweep: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be >= 0")
        if self.test_size < 1:
            raise ValueError("test_size must be >= 1")
        for axis in self.sweep:
            if axis not in _SWEEP_AXES:
                raise ValueError(f"unknown sweep axis {axis!r}")
            if not self.sweep[axis]:
                raise ValueError(f"sweep axis {axis!r} is empty")

    @property
    def vocab(self) -> Vocab:
        return Vocab(self.base_in, self.base_out)


@dataclass
class AttackReport:
    outcome: str
    winning_method: str | None
    winning_k: int | None
    epochs: int
    win_epoch: int | None
    distinct_samples: int
    log2_samples: float | None
    wall_clock_s: float
    acc_curve: list
    loss_curve: list
    best_bit_fraction: float
    winner_matches_secret: bool | None
    residual_stddev: float | None
    seed: int
    recovery_report: dict | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _generate(params: LweParams, secret, count: int, rng) -> SampleSet:
    if params.layout == LAYOUT_CIRCULANT:
        return gen_rlwe_samples(params, secret, count, rng)
    return gen_plain_samples(params, secret, count, rng)


class _CombineStream:
    """Feeds combined training sets off one fresh pool, tracking how many
    combinations each pool row has joined across the whole run."""

    def __init__(self, pool: SampleSet, k: int, reuse_limit: int):
        self.pool = pool
        self.k = k
        self.uses_left = np.full(len(pool), reuse_limit, dtype=np.int64)
        self.available = list(range(len(pool)))
        self.reuse_limit = reuse_limit

    def draw(self, count: int, rng: np.random.Generator) -> SampleSet:
        A = np.empty((count, self.pool.n), dtype=np.int64)
        b = np.empty(count, dtype=np.int64)
        for i in range(count):
            if len(self.available) < self.k:
                raise ValueError(
                    f"combination pool exhausted after {i} of {count} draws")
            pick = rng.choice(len(self.available), size=self.k, replace=False)
            idx = [self.available[j] for j in pick]
            while True:
                coeffs = rng.integers(-1, 2, size=self.k)
                if np.any(coeffs):
                    break
            A[i], b[i] = combine_rows(self.pool, idx, coeffs)
            self.uses_left[idx] -= 1
            if np.any(self.uses_left[idx] == 0):
                self.available = [j for j in self.available
                                  if self.uses_left[j] > 0]
        return SampleSet(A, b, self.pool.q, self.pool.sigma,
                         math.sqrt(self.k) * self.pool.sigma,
                         provenance="combined", layout=self.pool.layout,
                         combine_k=self.k, reuse_limit=self.reuse_limit)


def _recovery_pass(model: Predictor, cfg: ExperimentConfig, acc: float,
                   lwe_set: SampleSet, rng: np.random.Generator) -> RecoveryReport:
    rec = cfg.recovery
    params = cfg.lwe
    verify_set = lwe_set if len(lwe_set) <= rec.verify_count else \
        lwe_set.subset(slice(0, rec.verify_count))
    report = RecoveryReport()
    for K in rec.k_schedule(params.q, rng):
        scores, _missing = direct_recover(model, K, params.n, params.q)
        for guess in binarize(scores, params.q, source_k=K):
            report.record(guess,
                          verify_secret(guess, verify_set, params.sigma))
    if acc >= rec.distinguisher_trigger and acc > 2 * rec.tau:
        guess = distinguisher_recover(model, params.n, params.q, acc, rec.tau,
                                      lwe_set, rng, t=rec.distinguisher_t)
        report.record(guess, verify_secret(guess, verify_set, params.sigma))
    return report


def run_attack(cfg: ExperimentConfig, predictor=None,
               curve_csv=None, log=None) -> AttackReport:
    """Run the full pipeline; returns a report, never raises on budget
    exhaustion.

    `predictor` switches to test mode: recovery runs once at epoch 0
    against the injected predictor and no training happens.  It may be a
    Predictor instance or a callable mapping the generated SecretKey to
    one (e.g. ExactOracle itself), since the secret is drawn in here.
    """
    t0 = time.monotonic()
    seeds = np.random.SeedSequence(cfg.seed).spawn(5)
    data_rng, test_rng, rec_rng = (np.random.default_rng(s) for s in seeds[:3])
    model_seed = int(seeds[3].generate_state(1)[0])
    shuffle_rng = np.random.default_rng(seeds[4])

    params = cfg.lwe
    secret = gen_secret(params, data_rng)
    true = secret.coords
    ones = np.flatnonzero(true == 1)
    test = _generate(params, secret, cfg.test_size, test_rng)
    acc_test = test if len(test) <= cfg.recovery.acc_sample_count else \
        test.subset(slice(0, cfg.recovery.acc_sample_count))

    if predictor is None:
        model: Predictor = TrainedModel(cfg.model, cfg.vocab, params.n,
                                        params.q, seed=model_seed)
        epochs_budget = cfg.max_epochs
    else:
        model = predictor(secret) if callable(predictor) \
            and not isinstance(predictor, Predictor) else predictor
        epochs_budget = 0

    stream = None
    if cfg.combine_k is not None and predictor is None:
        pool_size = cfg.combine_pool or cfg.model.epoch_size
        pool = _generate(params, secret, pool_size, data_rng)
        stream = _CombineStream(pool, cfg.combine_k, cfg.combine_reuse)
        distinct = pool_size
    else:
        distinct = 0

    acc_curve, loss_curve = [], []
    best_bits, ones_covered = 0.0, False
    outcome, winner, win_epoch = OUTCOME_FAILED, None, None
    residual = None
    last_recovery = None

    def out_of_time():
        return (cfg.wall_clock_s is not None
                and time.monotonic() - t0 > cfg.wall_clock_s)

    def attempt(epoch: int) -> RecoveryReport:
        nonlocal best_bits, ones_covered, outcome, winner, win_epoch, \
            residual, last_recovery
        acc = acc_tau(model, acc_test, cfg.recovery.tau)
        acc_curve.append(acc)
        rec_report = _recovery_pass(model, cfg, acc, test, rec_rng)
        last_recovery = rec_report
        for guess, _v in rec_report.candidates:
            best_bits = max(best_bits, float((guess.candidate == true).mean()))
            if ones.size and (guess.candidate[ones] == 1).all():
                ones_covered = True
        if rec_report.accepted:
            outcome = OUTCOME_FULL
            winner = rec_report.winner
            win_epoch = epoch
            residual = next(r.residual_stddev
                            for g, r in rec_report.candidates if g is winner)
        if log is not None:
            loss_txt = f"{loss_curve[-1]:.4f}" if loss_curve else "-"
            log(f"epoch {epoch}: loss={loss_txt} acc_tau={acc:.4f} "
                f"accepted={rec_report.accepted}")
        if curve_csv is not None:
            _append_curve(curve_csv, epoch,
                          loss_curve[-1] if loss_curve else None, acc)
        return rec_report

    if predictor is not None:
        attempt(0)
    else:
        for epoch in range(epochs_budget):
            if out_of_time():
                break
            if stream is not None:
                try:
                    train_set = stream.draw(cfg.model.epoch_size, data_rng)
                except ValueError:  # pool exhausted: a budget, not a crash
                    break
            else:
                if (cfg.max_samples is not None
                        and distinct + cfg.model.epoch_size > cfg.max_samples):
                    break
                train_set = _generate(params, secret, cfg.model.epoch_size,
                                      data_rng)
                distinct += len(train_set)
            stats = model.train_epoch(train_set, shuffle_rng)
            loss_curve.append(stats["mean_loss"])
            if attempt(epoch).accepted:
                break

    if outcome != OUTCOME_FULL and ones_covered:
        outcome = OUTCOME_ONES
    epochs_run = len(loss_curve)
    return AttackReport(
        outcome=outcome,
        winning_method=None if winner is None else winner.method,
        winning_k=None if winner is None else winner.source_k,
        epochs=epochs_run,
        win_epoch=win_epoch,
        distinct_samples=distinct,
        log2_samples=math.log2(distinct) if distinct else None,
        wall_clock_s=time.monotonic() - t0,
        acc_curve=acc_curve,
        loss_curve=loss_curve,
        best_bit_fraction=best_bits,
        winner_matches_secret=None if winner is None else
        bool(np.array_equal(winner.candidate, true)),
        residual_stddev=residual,
        seed=cfg.seed,
        recovery_report=None if last_recovery is None
        else last_recovery.to_dict(),
    )


@dataclass
class TrainReport:
    success: bool
    kind: str
    best_accuracy: float
    epochs: int
    examples: int
    log2_examples: float | None
    wall_clock_s: float
    loss_curve: list
    acc_curve: list

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def run_task(kind: str, cfg: ExperimentConfig, curve_csv=None,
             log=None) -> TrainReport:
    """Train on a plain arithmetic task to the stopping rule: exact test
    accuracy >= 95%, a 60-epoch loss plateau, or budget exhaustion."""
    if kind not in TASK_KINDS:
        raise ValueError(f"unknown task kind {kind!r}")
    params = cfg.lwe
    if kind == "1d-modmul" and params.n != 1:
        raise ValueError("1d-modmul requires n=1")
    if kind in ("1d-modmul", "nd-uniform") and params.secret_dist != "uniform":
        raise ValueError(f"{kind} requires a uniform secret")
    if kind == "nd-binary" and params.secret_dist != "binary":
        raise ValueError("nd-binary requires a binary secret")
    if params.sigma != 0:
        raise ValueError("arithmetic tasks are exact: set sigma=0")

    t0 = time.monotonic()
    seeds = np.random.SeedSequence(cfg.seed).spawn(4)
    data_rng, test_rng = (np.random.default_rng(s) for s in seeds[:2])
    model_seed = int(seeds[2].generate_state(1)[0])
    shuffle_rng = np.random.default_rng(seeds[3])

    secret = gen_secret(params, data_rng)
    test = _generate(params, secret, cfg.test_size, test_rng)
    model = TrainedModel(cfg.model, cfg.vocab, params.n, params.q,
                         seed=model_seed)

    acc = exact_accuracy(model, test)
    best_acc, acc_curve, loss_curve = acc, [acc], []
    examples = 0
    success = acc >= 0.95
    best_loss, plateau = math.inf, 0
    for epoch in range(cfg.max_epochs):
        if success:
            break
        if cfg.wall_clock_s is not None and time.monotonic() - t0 > cfg.wall_clock_s:
            break
        if (cfg.max_samples is not None
                and examples + cfg.model.epoch_size > cfg.max_samples):
            break
        train_set = _generate(params, secret, cfg.model.epoch_size, data_rng)
        stats = model.train_epoch(train_set, shuffle_rng)
        examples += stats["examples"]
        acc = exact_accuracy(model, test)
        loss_curve.append(stats["mean_loss"])
        acc_curve.append(acc)
        best_acc = max(best_acc, acc)
        if log is not None:
            log(f"epoch {epoch}: loss={stats['mean_loss']:.4f} acc={acc:.4f}")
        if curve_csv is not None:
            _append_curve(curve_csv, epoch, stats["mean_loss"], acc)
        if acc >= 0.95:
            success = True
        if stats["mean_loss"] < best_loss - 1e-3:
            best_loss, plateau = stats["mean_loss"], 0
        else:
            plateau += 1
            if plateau >= 60:
                break
    return TrainReport(
        success=success,
        kind=kind,
        best_accuracy=best_acc,
        epochs=len(loss_curve),
        examples=examples,
        log2_examples=math.log2(examples) if examples else None,
        wall_clock_s=time.monotonic() - t0,
        loss_curve=loss_curve,
        acc_curve=acc_curve,
    )


_SWEEP_AXES = {
    "n": ("lwe", "n", int),
    "q": ("lwe", "q", int),
    "sigma": ("lwe", "sigma", float),
    "density": ("lwe", "density", float),
    "hamming": ("lwe", "hamming", int),
    "a_max_fraction": ("lwe", "a_max_fraction", float),
    "base_in": ("", "base_in", int),
    "base_out": ("", "base_out", int),
}


def _cell_config(cfg: ExperimentConfig, axes: list, values: tuple,
                 seed: int) -> ExperimentConfig:
    lwe_over, top_over = {}, {}
    for axis, value in zip(axes, values):
        section, fld, _ = _SWEEP_AXES[axis]
        (lwe_over if section == "lwe" else top_over)[fld] = value
    if "density" in lwe_over and "hamming" not in lwe_over:
        lwe_over["hamming"] = None  # density drives the weight in this cell
    lwe = replace(cfg.lwe, **lwe_over) if lwe_over else cfg.lwe
    return replace(cfg, lwe=lwe, seed=seed, sweep={}, **top_over)


def run_sweep(cfg: ExperimentConfig, out_csv=None,
              predictor_factory=None, log=None) -> list:
    """One run_attack per cell of the cross product of cfg.sweep axes.

    Returns the cell rows (dicts); optionally writes them as CSV.
    Per-cell failures are recorded with outcome 'error' and the sweep
    continues.  predictor_factory(cell_cfg) may inject test predictors.
    """
    if not cfg.sweep:
        raise ValueError("sweep axes not set")
    axes = sorted(cfg.sweep)
    grid = list(itertools.product(*(cfg.sweep[a] for a in axes)))
    cell_seeds = np.random.SeedSequence(cfg.seed).spawn(len(grid))
    rows = []
    for ci, values in enumerate(grid):
        cell_seed = int(cell_seeds[ci].generate_state(1)[0])
        cell = dict(zip(axes, values))
        try:
            cell_cfg = _cell_config(cfg, axes, values, cell_seed)
            predictor = None if predictor_factory is None else \
                predictor_factory(cell_cfg)
            report = run_attack(cell_cfg, predictor=predictor)
            cell.update(
                outcome=report.outcome,
                bit_fraction=report.best_bit_fraction,
                epochs=report.epochs,
                log2_samples=report.log2_samples,
                wall_clock_s=report.wall_clock_s,
            )
        except Exception as exc:  # record and continue with the next cell
            cell.update(outcome="error", bit_fraction=None, epochs=None,
                        log2_samples=None, wall_clock_s=None, error=str(exc))
        if log is not None:
            log(f"cell {cell}")
        rows.append(cell)
    if out_csv is not None:
        write_sweep_csv(rows, out_csv)
    return rows


def write_sweep_csv(rows: list, path) -> None:
    keys = []
    for row in rows:
        for k in row:
            if k not in keys:
                keys.append(k)
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=keys)
        writer.writeheader()
        writer.writerows(rows)


def load_sweep_csv(path) -> list:
    with open(path, newline="") as f:
        out = []
        for row in csv.DictReader(f):
            parsed = {}
            for k, v in row.items():
                if v in ("", None):
                    parsed[k] = None
                else:
                    try:
                        parsed[k] = int(v)
                    except ValueError:
                        try:
                            parsed[k] = float(v)
                        except ValueError:
                            parsed[k] = v
            out.append(parsed)
        return out


def _append_curve(path, epoch: int, loss, acc) -> None:
    new = not _file_exists(path)
    with open(path, "a", newline="") as f:
        writer = csv.writer(f)
        if new:
            writer.writerow(["epoch", "loss", "acc_tau"])
        writer.writerow([epoch, "" if loss is None else loss, acc])


def _file_exists(path) -> bool:
    try:
        with open(path):
            return True
    except OSError:
        return False


# ---------------------------------------------------------------------------
# flat key=value config files with dotted section names


def _coerce(text: str, annotation):
    origin = typing.get_origin(annotation)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(annotation) if a is not type(None)]
        if text.lower() in ("none", ""):
            return None
        return _coerce(text, args[0])
    if annotation is bool:
        if text.lower() in ("true", "1", "yes", "on"):
            return True
        if text.lower() in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if annotation is int:
        return int(text)
    if annotation is float:
        return float(text)
    if annotation is tuple:
        return tuple(_int_or_str(t.strip()) for t in text.split(",") if t.strip())
    return text


def _int_or_str(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def _section_fields(cls) -> dict:
    hints = typing.get_type_hints(cls)
    return {f.name: hints[f.name] for f in dataclasses.fields(cls)}


def config_from_items(items: dict, base: ExperimentConfig | None = None
                      ) -> ExperimentConfig:
    """Build a config from flat dotted keys like lwe.n or model.enc_dim."""
    cfg = base or ExperimentConfig()
    sections = {
        "lwe": (cfg.lwe, _section_fields(LweParams), {}),
        "model": (cfg.model, _section_fields(ModelConfig), {}),
        "recovery": (cfg.recovery, _section_fields(RecoveryConfig), {}),
    }
    top_fields = _section_fields(ExperimentConfig)
    top_over = {}
    sweep = dict(cfg.sweep)
    for key, text in items.items():
        if "." in key:
            section, fld = key.split(".", 1)
        else:
            section, fld = "", key
        if section == "sweep":
            if fld not in _SWEEP_AXES:
                raise ValueError(f"unknown sweep axis {fld!r}")
            _, _, typ = _SWEEP_AXES[fld]
            sweep[fld] = tuple(typ(t.strip()) for t in text.split(",")
                               if t.strip())
        elif section in sections:
            _, fields, over = sections[section]
            if fld not in fields:
                raise ValueError(f"unknown config key {key!r}")
            over[fld] = _coerce(text, fields[fld])
        elif section == "":
            if fld not in top_fields or fld in ("lwe", "model", "recovery",
                                                "sweep"):
                raise ValueError(f"unknown config key {key!r}")
            top_over[fld] = _coerce(text, top_fields[fld])
        else:
            raise ValueError(f"unknown config section {section!r}")
    lwe = replace(sections["lwe"][0], **sections["lwe"][2]) \
        if sections["lwe"][2] else cfg.lwe
    model = replace(sections["model"][0], **sections["model"][2]) \
        if sections["model"][2] else cfg.model
    recovery = replace(sections["recovery"][0], **sections["recovery"][2]) \
        if sections["recovery"][2] else cfg.recovery
    return replace(cfg, lwe=lwe, model=model, recovery=recovery, sweep=sweep,
                   **top_over)


def parse_config_text(text: str) -> dict:
    items = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        key, val = line.split("=", 1)
        items[key.strip()] = val.strip()
    return items


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    with open(path) as f:
        return config_from_items(parse_config_text(f.read()), base)


def config_to_items(cfg: ExperimentConfig) -> dict:
    items = {}
    for fld in dataclasses.fields(ExperimentConfig):
        if fld.name in ("lwe", "model", "recovery", "sweep"):
            continue
        items[fld.name] = _fmt(getattr(cfg, fld.name))
    for section, obj in (("lwe", cfg.lwe), ("model", cfg.model),
                         ("recovery", cfg.recovery)):
        for fld in dataclasses.fields(obj):
            items[f"{section}.{fld.name}"] = _fmt(getattr(obj, fld.name))
    for axis, values in cfg.sweep.items():
        items[f"sweep.{axis}"] = ",".join(str(v) for v in values)
    return items


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w") as f:
        for key, val in config_to_items(cfg).items():
            f.write(f"{key} = {val}\n")
