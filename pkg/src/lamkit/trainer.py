"""Optimization loop: Adam with decoupled weight decay, alternating
labeled-source / unlabeled-target batches, source-validation UAR early
stopping, plus the multi-strategy/multi-seed experiment grid.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import Diverged, EmptySplit, InvalidConfig, LamkitError, ShapeError
from .ladf import filter_records
from .metrics import confusion, uar
from .model import (
    ModelConfig,
    ModelParams,
    backward,
    forward,
    init_params,
    predict,
)

DECAY_MODES = ("weight_decay", "lr_decay")


@dataclass(frozen=True)
class TrainConfig:
    seed: int
    anchor: object = None  # AnchorPlan or None (no anchoring)
    learning_rate: float = 1e-4
    weight_decay: float = 0.001
    batch_size: int = 64
    max_epochs: int = 70
    early_stop_patience: int = 7
    gamma: float = 0.5
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    decay_mode: str = "weight_decay"

    def __post_init__(self):
        if self.learning_rate <= 0 or self.weight_decay < 0:
            raise InvalidConfig("learning_rate must be > 0, weight_decay >= 0")
        if self.batch_size < 2:
            raise InvalidConfig("batch_size must be >= 2 (covariance needs n >= 2)")
        if self.max_epochs < 1:
            raise InvalidConfig("max_epochs must be >= 1")
        if self.early_stop_patience < 1:
            raise InvalidConfig("early_stop_patience must be >= 1")
        if self.gamma < 0:
            raise InvalidConfig("gamma must be >= 0")
        if self.decay_mode not in DECAY_MODES:
            raise InvalidConfig(f"unknown decay_mode {self.decay_mode!r}")


@dataclass
class EpochStats:
    epoch: int
    loss_er: float
    loss_coral: float
    loss_total: float
    val_uar: float


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)
    best_epoch: int = 0
    best_val_uar: float = 0.0
    stopped_early: bool = False
    seed: int = 0
    config: dict = field(default_factory=dict)
    checkpoint_path: str | None = None

    @property
    def epochs_run(self) -> int:
        return len(self.epochs)

    def to_dict(self) -> dict:
        return {
            "epochs": [vars(e) for e in self.epochs],
            "best_epoch": self.best_epoch,
            "best_val_uar": self.best_val_uar,
            "stopped_early": self.stopped_early,
            "epochs_run": self.epochs_run,
            "seed": self.seed,
            "config": self.config,
            "checkpoint_path": self.checkpoint_path,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def records_to_batch(records, header):
    """Stack utterance-segment features into an (L, n, D) tensor + labels."""
    if not records:
        raise EmptySplit("no records to batch")
    feats = np.stack([rec.utterance().features for rec in records], axis=1)
    labels = np.array([rec.emotion for rec in records], dtype=np.int64)
    if feats.shape[0] != header.num_layers or feats.shape[2] != header.dim:
        raise ShapeError(f"features {feats.shape} disagree with header")
    return feats, labels


class _Adam:
    """Adam with optional decoupled weight decay per tensor group."""

    def __init__(self, params: ModelParams, cfg: TrainConfig):
        self.cfg = cfg
        self.t = 0
        self.m = params.zeros_like()
        self.v = params.zeros_like()

    def step(self, params: ModelParams, grads: ModelParams, lr: float):
        self.t += 1
        b1, b2, eps = self.cfg.adam_beta1, self.cfg.adam_beta2, self.cfg.adam_epsilon
        corr1 = 1.0 - b1**self.t
        corr2 = 1.0 - b2**self.t
        decay = self.cfg.weight_decay if self.cfg.decay_mode == "weight_decay" else 0.0
        for (name, p), (_, g), (_, m), (_, v) in zip(
            params.tensors(), grads.tensors(), self.m.tensors(), self.v.tensors()
        ):
            m[...] = b1 * m + (1.0 - b1) * g
            v[...] = b2 * v + (1.0 - b2) * g * g
            p -= lr * (m / corr1) / (np.sqrt(v / corr2) + eps)
            # decay applies to weight matrices only, never biases or
            # attention scores
            if decay > 0.0 and name.startswith(("proj_w", "fc_w")):
                p -= lr * decay * p


def _epoch_lr(cfg: TrainConfig, epoch: int) -> float:
    if cfg.decay_mode == "lr_decay":
        # linear decay by the configured factor per epoch, floored at 10%
        frac = max(0.1, 1.0 - cfg.weight_decay * (epoch - 1))
        return cfg.learning_rate * frac
    return cfg.learning_rate


def _validation_uar(params, model_config, val_feats, val_labels):
    preds, _ = predict(params, model_config, val_feats)
    return uar(confusion(val_labels, preds, model_config.num_classes))


def train(source, target, model_config: ModelConfig, train_config: TrainConfig):
    """Train on labeled source with optional unlabeled-target anchoring.

    ``source`` and ``target`` are (header, records) pairs; ``target`` may be
    None. Returns (best ModelParams, TrainReport); parameters come from the
    epoch with the best source-validation UAR.
    """
    src_header, src_records = source
    train_records = filter_records(src_records, split="train")
    val_records = filter_records(src_records, split="validation")
    if not train_records:
        raise EmptySplit("source train split is empty")
    if not val_records:
        raise EmptySplit("source validation split is empty")
    train_feats, train_labels = records_to_batch(train_records, src_header)
    val_feats, val_labels = records_to_batch(val_records, src_header)

    anchored = train_config.anchor is not None and target is not None
    tar_feats = None
    if anchored:
        tar_header, tar_records = target
        tar_train = filter_records(tar_records, split="train")
        if not tar_train:
            raise EmptySplit("target train split is empty")
        tar_feats, _ = records_to_batch(tar_train, tar_header)

    params = init_params(model_config, train_config.seed)
    optimizer = _Adam(params, train_config)
    # the same stream key on both sides makes batches coincide when the
    # target corpus is the source corpus, so the anchoring term is exactly 0
    shuffler = np.random.Generator(
        np.random.Philox(key=(train_config.seed << 64) | 0x5E0FF1E)
    )
    tar_shuffler = np.random.Generator(
        np.random.Philox(key=(train_config.seed << 64) | 0x5E0FF1E)
    )

    n_src = train_feats.shape[1]

    report = TrainReport(seed=train_config.seed, config=_config_echo(train_config))
    best_params = params.copy()
    best_uar = -1.0

    for epoch in range(1, train_config.max_epochs + 1):
        lr = _epoch_lr(train_config, epoch)
        order = shuffler.permutation(n_src)
        if anchored:
            tar_order = tar_shuffler.permutation(tar_feats.shape[1])
            tar_pos = 0
        sum_er = sum_coral = sum_total = 0.0
        steps = 0
        for start in range(0, n_src, train_config.batch_size):
            idx = order[start : start + train_config.batch_size]
            if idx.size < 2:
                continue  # covariance (and batch norm of losses) needs >= 2
            batch = train_feats[:, idx, :]
            labels = train_labels[idx]

            tar_batch = None
            if anchored:
                m = idx.size
                take = []
                while len(take) < m:
                    if tar_pos >= tar_order.size:
                        tar_order = tar_shuffler.permutation(tar_feats.shape[1])
                        tar_pos = 0
                    take.append(tar_order[tar_pos])
                    tar_pos += 1
                tar_batch = tar_feats[:, np.array(take), :]

            cache, losses = forward(
                params, model_config, batch, labels,
                target_batch=tar_batch,
                anchor=train_config.anchor if anchored else None,
                gamma=train_config.gamma,
            )
            if not np.isfinite(losses.total):
                raise Diverged(f"non-finite loss at epoch {epoch}, step {steps + 1}")
            grads = backward(params, model_config, cache)
            optimizer.step(params, grads, lr)
            sum_er += losses.er
            sum_coral += losses.coral
            sum_total += losses.total
            steps += 1

        val = _validation_uar(params, model_config, val_feats, val_labels)
        report.epochs.append(
            EpochStats(
                epoch=epoch,
                loss_er=sum_er / max(steps, 1),
                loss_coral=sum_coral / max(steps, 1),
                loss_total=sum_total / max(steps, 1),
                val_uar=val,
            )
        )
        if val > best_uar:
            best_uar = val
            best_params = params.copy()
            report.best_epoch = epoch
        elif epoch - report.best_epoch >= train_config.early_stop_patience:
            report.stopped_early = True
            break

    report.best_val_uar = best_uar
    return best_params, report


def _config_echo(cfg: TrainConfig) -> dict:
    echo = {
        k: v
        for k, v in vars(cfg).items()
        if isinstance(v, (int, float, str, bool, type(None)))
    }
    if cfg.anchor is not None:
        echo["anchor"] = {
            "strategy": cfg.anchor.strategy,
            "layers": list(cfg.anchor.layers),
        }
    else:
        echo["anchor"] = None
    return echo


@dataclass
class ExperimentCell:
    strategy: str
    seed: int
    uar: float | None
    best_epoch: int
    epochs_run: int
    error: str | None = None


@dataclass
class ExperimentTable:
    cells: list = field(default_factory=list)

    def summary(self) -> dict:
        """Per-strategy mean and sample standard deviation of target UAR."""
        by_strategy: dict = {}
        for cell in self.cells:
            if cell.uar is not None:
                by_strategy.setdefault(cell.strategy, []).append(cell.uar)
        out = {}
        for strategy, uars in by_strategy.items():
            arr = np.array(uars)
            out[strategy] = {
                "mean_uar": float(arr.mean()),
                "sd_uar": float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
                "n": int(arr.size),
            }
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["strategy", "seed", "uar", "best_epoch", "epochs_run"])
        for cell in self.cells:
            writer.writerow(
                [
                    cell.strategy,
                    cell.seed,
                    "" if cell.uar is None else f"{cell.uar:.9g}",
                    cell.best_epoch,
                    cell.epochs_run,
                ]
            )
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {"cells": [vars(c) for c in self.cells], "summary": self.summary()},
            indent=2,
        )


def evaluate_target(params, model_config, target, split="test"):
    """Target-split UAR of a trained model."""
    tar_header, tar_records = target
    records = filter_records(tar_records, split=split)
    if not records:
        raise EmptySplit(f"target {split} split is empty")
    feats, labels = records_to_batch(records, tar_header)
    preds, _ = predict(params, model_config, feats)
    return uar(confusion(labels, preds, model_config.num_classes))


def _run_cell(args):
    source, target, model_config, base_config, strategy_name, plan, seed = args
    cfg = replace(base_config, anchor=plan, seed=seed,
                  gamma=base_config.gamma if plan is not None else 0.0)
    try:
        params, report = train(source, target, model_config, cfg)
        cell_uar = evaluate_target(params, model_config, target, split="test")
        return ExperimentCell(
            strategy=strategy_name,
            seed=seed,
            uar=cell_uar,
            best_epoch=report.best_epoch,
            epochs_run=report.epochs_run,
        )
    except LamkitError as e:
        return ExperimentCell(
            strategy=strategy_name, seed=seed, uar=None,
            best_epoch=0, epochs_run=0, error=f"{e.category}: {e}",
        )


def run_experiment(source, target, strategies, seeds, model_config: ModelConfig,
                   base_config: TrainConfig, jobs: int = 1) -> ExperimentTable:
    """Train one model per (strategy, seed) and tabulate target-test UAR.

    ``strategies`` is a list of (name, AnchorPlan-or-None) pairs; None means
    no anchoring (gamma forced to 0). Cells are self-seeded, so results are
    identical regardless of ``jobs``.
    """
    if not strategies:
        raise InvalidConfig("need at least one strategy")
    if not seeds:
        raise InvalidConfig("need at least one seed")

    work = [
        (source, target, model_config, base_config, name, plan, seed)
        for name, plan in strategies
        for seed in seeds
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_run_cell, work))
    else:
        cells = [_run_cell(w) for w in work]
    return ExperimentTable(cells=cells)
