"""Command-line entry point wiring all pipeline stages.

Subcommands: synth, validate, similarity, select, preset, train, evaluate,
experiment. Every randomized subcommand takes an explicit --seed; identical
argv and inputs produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import ladf, metrics, selection, similarity, synthgen, trainer
from .errors import InvalidConfig, LamkitError
from .model import ModelConfig, load_params, predict, save_params


def _parse_profile(spec: str, base: float, num_layers: int):
    """Parse "0.9@8,0.85@9,0.8@11" into a full per-layer profile."""
    profile = [base] * num_layers
    if spec:
        for part in spec.split(","):
            try:
                value, layer = part.split("@")
                profile[int(layer) - 1] = float(value)
            except (ValueError, IndexError) as e:
                raise InvalidConfig(f"bad profile entry {part!r}: {e}") from e
    return tuple(profile)


def _parse_layers(spec: str):
    return tuple(int(x) for x in spec.split(","))


def _cmd_synth(args) -> int:
    config = synthgen.SynthConfig(
        seed=args.seed,
        num_layers=args.layers,
        dim=args.dim,
        num_classes=args.classes,
        train_per_class=args.train_per_class,
        validation_per_class=args.val_per_class,
        test_per_class=args.test_per_class,
        similarity_profile=_parse_profile(args.profile, args.profile_base, args.layers),
        class_separation=args.class_separation,
        noise_scale=args.noise_scale,
        confound_scale=args.confound_scale,
        scale_jitter=args.scale_jitter,
        vowel_segments_per_utt=args.vowel_segments,
    )
    (src_header, src_records), (tar_header, tar_records), truth = synthgen.generate(config)
    ladf.write_ladf(src_header, src_records, args.out_src)
    ladf.write_ladf(tar_header, tar_records, args.out_tar)
    if args.truth:
        with open(args.truth, "w", encoding="utf-8") as f:
            json.dump(truth.to_dict(), f, indent=2)
        print(args.truth)
    print(args.out_src)
    print(args.out_tar)
    return 0


def _cmd_validate(args) -> int:
    report = ladf.validate(args.file)
    for v in report.violations:
        print(f"{v.kind}: {v.detail}", file=sys.stderr)
    print(f"{args.file}: {len(report.violations)} violation(s)")
    return 0 if report.ok else 1


def _cmd_similarity(args) -> int:
    source = ladf.read_ladf(args.source)
    target = ladf.read_ladf(args.target)
    report = similarity.layer_similarity(
        source, target, level=args.level, train_only=not args.include_test
    )
    similarity.export_report(report, "json", args.out)
    print(args.out)
    if args.csv:
        similarity.export_report(report, "csv", args.csv)
        print(args.csv)
    return 0


def _cmd_select(args) -> int:
    if args.preset:
        plan = selection.preset(args.preset, args.strategy)
    else:
        if not args.sim:
            raise InvalidConfig("select needs --sim or --preset")
        report = similarity.load_report(args.sim)
        plan = selection.select(
            report, args.strategy, k=args.k, seed=args.seed,
            phone_scope=args.phone_scope,
        )
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(plan.to_json())
    print(args.out)
    return 0


def _cmd_preset(args) -> int:
    names = [args.name] if args.name else sorted(selection.PRESETS)
    payload = {name: {k: list(v) for k, v in selection.PRESETS[name].items()}
               for name in names}
    if args.name and args.name not in selection.PRESETS:
        raise InvalidConfig(f"unknown preset {args.name!r}")
    print(json.dumps(payload, indent=2))
    return 0


def _anchor_from_args(args):
    if args.anchor:
        with open(args.anchor, "r", encoding="utf-8") as f:
            return selection.AnchorPlan.from_json(f.read())
    if args.layers:
        return selection.custom_plan(_parse_layers(args.layers), provenance="cli")
    return None


def _model_config(args, header) -> ModelConfig:
    return ModelConfig(
        num_layers=header.num_layers,
        input_dim=header.dim,
        projection_dim=args.projection_dim,
        fc_dims=(64, 32, 16, len(header.emotions)),
        gamma=args.gamma,
        coral_variant=args.coral_variant,
    )


def _train_config(args, anchor) -> trainer.TrainConfig:
    return trainer.TrainConfig(
        seed=args.seed,
        anchor=anchor,
        learning_rate=args.learning_rate,
        weight_decay=args.weight_decay,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        early_stop_patience=args.patience,
        gamma=args.gamma,
        decay_mode=args.decay_mode,
    )


def _cmd_train(args) -> int:
    source = ladf.read_ladf(args.source)
    target = ladf.read_ladf(args.target) if args.target else None
    anchor = _anchor_from_args(args)
    model_config = _model_config(args, source[0])
    train_config = _train_config(args, anchor)
    params, report = trainer.train(source, target, model_config, train_config)

    os.makedirs(args.out, exist_ok=True)
    model_path = os.path.join(args.out, "model.lamp")
    report_path = os.path.join(args.out, "report.json")
    save_params(model_path, model_config, params)
    report.checkpoint_path = model_path
    with open(report_path, "w", encoding="utf-8") as f:
        f.write(report.to_json())
    print(model_path)
    print(report_path)
    return 0


def _cmd_evaluate(args) -> int:
    config, params = load_params(args.model)
    header, records = ladf.read_ladf(args.data)
    records = ladf.filter_records(records, split=args.split)
    feats, labels = trainer.records_to_batch(records, header)
    preds, _ = predict(params, config, feats)
    cm = metrics.confusion(labels, preds, header.emotions)
    value = metrics.uar(cm)
    print(f"uar {value:.9g}")
    if args.out:
        metrics.export_confusion_json(cm, args.out)
        print(args.out)
    return 0


def _cmd_experiment(args) -> int:
    source = ladf.read_ladf(args.source)
    target = ladf.read_ladf(args.target)

    strategies = []
    if args.sim and args.strategies:
        report = similarity.load_report(args.sim)
        for name in args.strategies.split(","):
            if name.lower() == "none":
                strategies.append(("none", None))
            else:
                plan = selection.select(report, name, k=args.k, seed=args.rl_seed)
                strategies.append((name.upper(), plan))
    for spec in args.anchor or []:
        name, _, layers = spec.partition("=")
        if not layers:
            if name.lower() == "none":
                strategies.append(("none", None))
                continue
            raise InvalidConfig(f"bad --anchor spec {spec!r}; use NAME=8,9,11 or none")
        if layers.lower() == "none":
            strategies.append((name, None))
        else:
            strategies.append(
                (name, selection.custom_plan(_parse_layers(layers), provenance="cli"))
            )
    if not strategies:
        raise InvalidConfig("experiment needs --anchor specs or --sim with --strategies")

    seeds = [int(s) for s in args.seeds.split(",")]
    model_config = _model_config(args, source[0])
    base = _train_config_base(args)
    table = trainer.run_experiment(
        source, target, strategies, seeds, model_config, base, jobs=args.jobs
    )
    with open(args.out_csv, "w", encoding="utf-8") as f:
        f.write(table.to_csv())
    print(args.out_csv)
    if args.out_json:
        with open(args.out_json, "w", encoding="utf-8") as f:
            f.write(table.to_json())
        print(args.out_json)
    return 0


def _train_config_base(args) -> trainer.TrainConfig:
    return trainer.TrainConfig(
        seed=0,
        anchor=None,
        learning_rate=args.learning_rate,
        weight_decay=args.weight_decay,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        early_stop_patience=args.patience,
        gamma=args.gamma,
        decay_mode=args.decay_mode,
    )


def _add_train_flags(p):
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--projection-dim", type=int, default=64)
    p.add_argument("--coral-variant", default="normalized_squared",
                   choices=["normalized_squared", "plain_frobenius"])
    p.add_argument("--learning-rate", type=float, default=1e-4)
    p.add_argument("--weight-decay", type=float, default=0.001)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--max-epochs", type=int, default=70)
    p.add_argument("--patience", type=int, default=7)
    p.add_argument("--decay-mode", default="weight_decay",
                   choices=["weight_decay", "lr_decay"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lamkit",
        description="Layer-anchored cross-lingual emotion recognition toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate paired synthetic corpora")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--layers", type=int, default=12)
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--classes", type=int, default=4)
    p.add_argument("--train-per-class", type=int, default=50)
    p.add_argument("--val-per-class", type=int, default=20)
    p.add_argument("--test-per-class", type=int, default=20)
    p.add_argument("--profile", default="",
                   help="per-layer similarity overrides, e.g. 0.9@8,0.85@9")
    p.add_argument("--profile-base", type=float, default=0.3)
    p.add_argument("--class-separation", type=float, default=1.0)
    p.add_argument("--noise-scale", type=float, default=0.1)
    p.add_argument("--confound-scale", type=float, default=1.0)
    p.add_argument("--scale-jitter", type=float, default=1.0)
    p.add_argument("--vowel-segments", type=int, default=2)
    p.add_argument("--out-src", required=True)
    p.add_argument("--out-tar", required=True)
    p.add_argument("--truth")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("validate", help="check a LADF file")
    p.add_argument("file")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("similarity", help="cross-corpus layer similarity")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--level", default="utterance", choices=["utterance", "phone"])
    p.add_argument("--include-test", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--csv")
    p.set_defaults(func=_cmd_similarity)

    p = sub.add_parser("select", help="build an anchor plan")
    p.add_argument("--sim", help="similarity report JSON")
    p.add_argument("--preset", help="preset name instead of a report")
    p.add_argument("--strategy", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--phone-scope", choices=["vowel", "consonant"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_select)

    p = sub.add_parser("preset", help="print published layer-set presets")
    p.add_argument("--name")
    p.set_defaults(func=_cmd_preset)

    p = sub.add_parser("train", help="train a layer-anchored classifier")
    p.add_argument("--source", required=True)
    p.add_argument("--target")
    p.add_argument("--anchor", help="anchor plan JSON file")
    p.add_argument("--layers", help="inline anchor layers, e.g. 8,9,11")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_train_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on a corpus split")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default="test", choices=list(ladf.SPLITS))
    p.add_argument("--out")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("experiment", help="multi-strategy, multi-seed grid")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--sim")
    p.add_argument("--strategies", help="comma list, e.g. gl,wl,none")
    p.add_argument("--anchor", action="append",
                   help="NAME=8,9,11 or NAME=none; repeatable")
    p.add_argument("--k", type=int)
    p.add_argument("--rl-seed", type=int)
    p.add_argument("--seeds", required=True, help="comma list of training seeds")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-json")
    _add_train_flags(p)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LamkitError as e:
        print(f"error [{e.category}]: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error [io]: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
