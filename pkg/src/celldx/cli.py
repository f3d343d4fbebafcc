"""Command-line entry point for the full pipeline.

Every subcommand prints its resolved configuration (seed included) to stderr
before doing anything, emits machine-readable JSON results on stdout with
stable key order, and reserves exit codes: 0 success, 1 runtime failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from . import model as model_mod
from . import nn
from . import service as service_mod
from . import training
from .data import dataset as dataset_mod
from .data import npy as npy_mod
from .data import synthetic
from .errors import CelldxError
from .pointcloud import generator as gen_mod
from .pointcloud import pcd as pcd_mod
from .pointcloud.synth3d import DEFAULT_RADIUS, emit_dataset

SYNTHETIC_PREFIX = "synthetic:"


def _banner(command: str, args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    resolved["command"] = command
    print(json.dumps(resolved, sort_keys=True, default=str), file=sys.stderr)


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _spec_sidecar(weights_path: str) -> str:
    return weights_path + ".spec.json"


def _resolve_samples(data: str, image_size: int, subset: int | None, seed: int):
    if data.startswith(SYNTHETIC_PREFIX):
        n = int(data[len(SYNTHETIC_PREFIX):])
        samples = synthetic.make_cell_dataset(n, seed=seed, size=image_size)
    else:
        samples, report = dataset_mod.load_dataset(data, image_size=image_size)
        print(json.dumps({"loaded": report.total, "skipped": len(report.skipped),
                          "counts": report.class_counts}, sort_keys=True), file=sys.stderr)
    if subset:
        samples = dataset_mod.stratified_subset(samples, subset, seed=seed)
    return samples


def _write_history(path: str, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")


def _load_classifier(args):
    spec_path = args.spec or _spec_sidecar(args.weights)
    spec = model_mod.load_spec(spec_path)
    weights = model_mod.load_weights(args.weights)
    spec.validate()
    model_mod.check_weights_match(spec, weights)
    return spec, weights


def cmd_train(args) -> int:
    image_size = args.image_size or (64 if args.scale == "mini" else 224)
    samples = _resolve_samples(args.data, image_size, args.subset, args.seed)
    split = dataset_mod.split(samples, (1 - args.val_ratio - args.test_ratio,
                                        args.val_ratio, args.test_ratio), seed=args.seed)
    spec = model_mod.build_vgg19((3, image_size, image_size), args.scale)
    spec = model_mod.append_transfer_head(spec, freeze_features=args.freeze_features)
    spec.version = args.version
    weights = nn.init_weights(spec, args.seed)
    if args.init_weights:
        for name, tensor in model_mod.load_weights(args.init_weights).items():
            if name not in weights:
                print(f"error: imported tensor {name!r} not in this architecture", file=sys.stderr)
                return 1
            if tuple(tensor.shape) != tuple(weights[name].shape):
                print(f"error: imported {name!r} has shape {tensor.shape}, "
                      f"expected {weights[name].shape}", file=sys.stderr)
                return 1
            weights[name] = tensor
    cfg = training.TrainConfig(
        epochs=args.epochs, batch_size=args.batch_size, seed=args.seed,
        lr=args.lr, augment=not args.no_augment,
    )
    trained, history = training.train(spec, weights, split, cfg)
    model_mod.save_weights(trained, args.out)
    model_mod.save_spec(spec, _spec_sidecar(args.out))
    _write_history(args.out + ".history.jsonl", history)
    test_metrics = None
    if split.test:
        test_metrics = training.evaluate(spec, trained, split.subset("test")).to_dict()
    _emit({
        "epochs": len(history),
        "final_loss": history[-1].train_loss,
        "history": args.out + ".history.jsonl",
        "spec": _spec_sidecar(args.out),
        "test_metrics": test_metrics,
        "weights": args.out,
    })
    return 0


def cmd_evaluate(args) -> int:
    spec, weights = _load_classifier(args)
    samples = _resolve_samples(args.data, spec.input_shape[1], args.subset, args.seed)
    split = dataset_mod.split(samples, (1 - args.val_ratio - args.test_ratio,
                                        args.val_ratio, args.test_ratio), seed=args.seed)
    metrics = training.evaluate(spec, weights, split.subset(args.split))
    _emit(metrics.to_dict())
    return 0


def cmd_prune(args) -> int:
    if args.fine_tune > 0 and not args.data:
        print("error: --fine-tune needs --data", file=sys.stderr)
        return 2
    spec, weights = _load_classifier(args)
    pruned, report = training.prune_magnitude(
        weights, training.PruneConfig(sparsity=args.sparsity, scope=args.scope)
    )
    fine_tune_metrics = None
    if args.fine_tune > 0:
        samples = _resolve_samples(args.data, spec.input_shape[1], args.subset, args.seed)
        split = dataset_mod.split(samples, seed=args.seed)
        cfg = training.TrainConfig(seed=args.seed, lr=args.lr, augment=not args.no_augment)
        pruned, _ = training.fine_tune(spec, pruned, split, args.fine_tune, cfg)
        if split.val:
            fine_tune_metrics = training.evaluate(spec, pruned, split.subset("val")).to_dict()
    model_mod.save_weights(pruned, args.out)
    model_mod.save_spec(spec, _spec_sidecar(args.out))
    payload = report.to_dict()
    payload.update({"fine_tune_epochs": args.fine_tune, "val_metrics": fine_tune_metrics,
                    "weights": args.out})
    _emit(payload)
    return 0


def cmd_predict(args) -> int:
    spec, weights = _load_classifier(args)
    image = dataset_mod.load_image(args.image, spec.input_shape[1])
    diagnosis = model_mod.predict(spec, weights, image)
    _emit(diagnosis.to_dict())
    return 0


def cmd_reconstruct(args) -> int:
    spec_path = args.gen_spec or _spec_sidecar(args.gen_weights)
    gen = gen_mod.load_generator_spec(spec_path)
    weights = model_mod.load_weights(args.gen_weights)
    gen.validate()
    image = dataset_mod.load_image(args.image, gen.image_size)
    cloud = gen_mod.generate(gen, weights, image)
    payload = pcd_mod.write_pcd(cloud) if args.format == "pcd" else pcd_mod.pcd_to_obj(cloud)
    with open(args.out, "wb") as fh:
        fh.write(payload)
    _emit({"format": args.format, "out": args.out, "points": len(cloud)})
    return 0


def cmd_synth(args) -> int:
    data = emit_dataset(args.count, seed=args.seed, views=args.views,
                        image_size=args.size, radius=args.radius)
    npy_mod.save_npy(data, args.out)
    _emit({"out": args.out, "samples": args.count, "shape": list(data.shape)})
    return 0


def cmd_train_gen(args) -> int:
    data = npy_mod.load_npy(args.data)
    views, _, size, _ = data.shape[1:]
    gen, weights = gen_mod.build_generator(
        views=views, image_size=size, latent_dim=args.latent_dim,
        radius=args.radius, seed=args.seed,
    )
    cfg = gen_mod.GenTrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                                 seed=args.seed, lr=args.lr)
    trained, history = gen_mod.train_generator(gen, weights, data.astype("float32"), cfg)
    model_mod.save_weights(trained, args.out)
    gen_mod.save_generator_spec(gen, _spec_sidecar(args.out))
    _write_history(args.out + ".history.jsonl", history)
    _emit({
        "epochs": len(history),
        "final_loss": history[-1].train_loss,
        "spec": _spec_sidecar(args.out),
        "weights": args.out,
    })
    return 0


def cmd_serve(args) -> int:
    cfg = service_mod.ServiceConfig.from_file(args.config) if args.config else service_mod.ServiceConfig()
    env = os.environ
    overrides = {
        "host": args.host or env.get("CELLDX_HOST"),
        "port": args.port or (int(env["CELLDX_PORT"]) if "CELLDX_PORT" in env else None),
        "classifier_spec": env.get("CELLDX_CLASSIFIER_SPEC"),
        "classifier_weights": env.get("CELLDX_CLASSIFIER_WEIGHTS"),
        "generator_spec": env.get("CELLDX_GENERATOR_SPEC"),
        "generator_weights": env.get("CELLDX_GENERATOR_WEIGHTS"),
    }
    for key, value in overrides.items():
        if value is not None:
            cfg = replace(cfg, **{key: value})
    service_mod.run(cfg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="celldx", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data_flags(p, with_split=True):
        p.add_argument("--data", required=True,
                       help="dataset root (Parasitized/ + Uninfected/) or synthetic:N")
        p.add_argument("--subset", type=int, default=None,
                       help="stratified subset size drawn before splitting")
        if with_split:
            p.add_argument("--val-ratio", type=float, default=0.1)
            p.add_argument("--test-ratio", type=float, default=0.1)

    p = sub.add_parser("train", help="train the classifier")
    add_data_flags(p)
    p.add_argument("--scale", choices=["mini", "full"], default="mini")
    p.add_argument("--image-size", type=int, default=None)
    p.add_argument("--epochs", type=int, default=25)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--no-augment", action="store_true")
    p.add_argument("--freeze-features", action="store_true",
                   help="train only the dense head (for imported feature weights)")
    p.add_argument("--init-weights", default=None, metavar="E2EW",
                   help="seed matching tensors (e.g. converted pretrained features) before training")
    p.add_argument("--version", default="v1")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="compute metrics on a split")
    add_data_flags(p)
    p.add_argument("--weights", required=True)
    p.add_argument("--spec", default=None)
    p.add_argument("--split", choices=["train", "val", "test"], default="test")
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("prune", help="magnitude-prune weights, optionally fine-tune")
    p.add_argument("--weights", required=True)
    p.add_argument("--spec", default=None)
    p.add_argument("--sparsity", type=float, default=0.5)
    p.add_argument("--scope", choices=["global", "per-tensor"], default="global")
    p.add_argument("--fine-tune", type=int, default=0, metavar="EPOCHS")
    p.add_argument("--data", default=None, help="required when --fine-tune > 0")
    p.add_argument("--subset", type=int, default=None)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--no-augment", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("predict", help="diagnose one image")
    p.add_argument("--weights", required=True)
    p.add_argument("--spec", default=None)
    p.add_argument("--image", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("reconstruct", help="build a 3D model from one image")
    p.add_argument("--gen-weights", required=True)
    p.add_argument("--gen-spec", default=None)
    p.add_argument("--image", required=True)
    p.add_argument("--format", choices=["obj", "pcd"], default="obj")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("synth", help="emit synthetic generator training data")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--views", type=int, default=8)
    p.add_argument("--size", type=int, default=32)
    p.add_argument("--radius", type=float, default=DEFAULT_RADIUS)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train-gen", help="train the 3D structure generator")
    p.add_argument("--data", required=True, help="NPY from the synth command")
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--latent-dim", type=int, default=128)
    p.add_argument("--radius", type=float, default=DEFAULT_RADIUS)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_gen)

    p = sub.add_parser("serve", help="run the HTTP inference service")
    p.add_argument("--config", default=None)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _banner(args.command, args)
    try:
        return args.func(args)
    except (CelldxError, FileNotFoundError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
