"""Command-line front end: ``topofc <subcommand> --dataset DIR ...``.

Exit codes: 0 success, 2 usage errors, 3 data/format errors, 4 numeric errors.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .embed import MnPolicy
from .errors import ArgumentError, DataError, TopoFCError
from .fconn import write_fc_csv
from .graphstore import graph_slice, parse_tudataset, validate
from .learn.evaluation import weighted_f1
from .learn.mlp import MlpConfig, predict, train
from .pgh import WeightedGraph, betti_curve, decompose, threshold_grid
from .pipeline import PipelineConfig, crossval, embed_records, extract, feature_policy, graph_fc
from .wasser import barycenter_with_spread, pairwise_distances

log = logging.getLogger("topofc")

SUBCOMMANDS = ("extract", "embed", "betti", "distance", "barycenter", "train", "crossval", "validate")
# keys that locate outputs or schedule work; left out of the config echo so
# reruns with other paths or worker counts stay byte-identical
_NOT_ECHOED = {"out", "output_dir", "workers", "config", "command", "verbose"}
_EXT = {"extract": "jsonl", "embed": "jsonl", "betti": "csv", "distance": "csv",
        "barycenter": "csv", "train": "json", "crossval": "json", "validate": "json"}


def _g(x: float) -> str:
    return format(float(x), ".17g")


def _floats(xs) -> str:
    return "[" + ",".join(_g(v) for v in np.asarray(xs).ravel()) + "]"


def default_workers() -> int:
    env = os.environ.get("TOPOFC_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _meta(args, ds) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_ECHOED}
    return {
        "tool": "topofc",
        "version": __version__,
        "command": args.command,
        "config": cfg,
        "dataset": ds.name,
        "input_sha256": ds.source_digest,
    }


def _csv_header(meta: dict) -> str:
    return "# " + json.dumps(meta, sort_keys=True) + "\n"


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        features=args.features,
        mn=args.mn,
        protocol=getattr(args, "protocol", "kfold:5"),
        hidden=args.hidden,
        dropout=args.dropout,
        lr=args.lr,
        weight_decay=args.weight_decay,
        epochs=args.epochs,
        batch_size=args.batch_size,
        standardize=not args.no_standardize,
        seed=args.seed,
    )


def _records(args, ds):
    return extract(ds, feature_policy(ds, args.features), args.workers)


def _emit_fc(args, ds) -> None:
    if not args.emit_fc:
        return
    fc = graph_fc(graph_slice(ds, args.graph), feature_policy(ds, args.features))
    buf = io.StringIO()
    buf.write(_csv_header(_meta(args, ds)))
    write_fc_csv(fc, buf)
    write_atomic(Path(args.emit_fc), buf.getvalue())


def cmd_extract(args, ds) -> str:
    _emit_fc(args, ds)
    lines = [json.dumps({"meta": _meta(args, ds)}, sort_keys=True)]
    for r in _records(args, ds):
        d = r.decomposition
        lines.append(
            '{"graph":%d,"num_nodes":%d,"num_components":%d,"births":%s,"deaths":%s,'
            '"zero_variance_rows":%d,"degenerate":%s}'
            % (r.graph, r.num_nodes, d.num_components, _floats(d.births), _floats(d.deaths),
               r.zero_variance_rows, "true" if d.degenerate else "false")
        )
    return "\n".join(lines) + "\n"


def cmd_embed(args, ds) -> str:
    m, n, embs = embed_records(_records(args, ds), MnPolicy.parse(args.mn))
    lines = [json.dumps({"meta": _meta(args, ds)}, sort_keys=True)]
    for k, (e, y) in enumerate(zip(embs, ds.labels)):
        lines.append(
            '{"graph":%d,"label":%d,"m":%d,"n":%d,"v_b":%s,"v_d":%s,"degenerate_b":%s,"degenerate_d":%s}'
            % (k, int(y), m, n, _floats(e.v_b), _floats(e.v_d),
               "true" if e.degenerate_b else "false", "true" if e.degenerate_d else "false")
        )
    return "\n".join(lines) + "\n"


def cmd_betti(args, ds) -> str:
    _emit_fc(args, ds)
    g = graph_slice(ds, args.graph)
    fc = graph_fc(g, feature_policy(ds, args.features))
    dec = decompose(WeightedGraph.from_fc(fc))
    curve = betti_curve(dec, threshold_grid(dec, args.grid))
    out = [_csv_header(_meta(args, ds)), "epsilon,beta0,beta1\n"]
    for e, b0, b1 in zip(curve.thresholds, curve.beta0, curve.beta1):
        out.append(f"{_g(e)},{int(b0)},{int(b1)}\n")
    return "".join(out)


def _value_sets(args, records):
    attr = "births" if args.set == "births" else "deaths"
    return [getattr(r.decomposition, attr) for r in records]


def cmd_distance(args, ds) -> str:
    sets = _value_sets(args, _records(args, ds))
    keep = [k for k, s in enumerate(sets) if s.size]
    if len(keep) < len(sets):
        log.warning("skipping %d graphs with empty %s sets", len(sets) - len(keep), args.set)
    out = [_csv_header(_meta(args, ds)), f"i,j,w_{_g(args.p)}\n"]
    for a, b, w in pairwise_distances([sets[k] for k in keep], args.p):
        out.append(f"{keep[a]},{keep[b]},{_g(w)}\n")
    return "".join(out)


def cmd_barycenter(args, ds) -> str:
    if not 0 <= args.cls < ds.num_classes:
        raise ArgumentError(f"--class must lie in 0..{ds.num_classes - 1}")
    sets = _value_sets(args, _records(args, ds))
    chosen = [s for s, y in zip(sets, ds.labels) if y == args.cls and s.size]
    if not chosen:
        raise DataError(f"class {args.cls} has no graphs with non-empty {args.set} sets")
    z, mean, std = barycenter_with_spread(chosen, args.resolution)
    out = [_csv_header(_meta(args, ds)), "z,value_mean,value_std\n"]
    for zz, mu, sd in zip(z, mean, std):
        out.append(f"{_g(zz)},{_g(mu)},{_g(sd)}\n")
    return "".join(out)


def cmd_train(args, ds) -> str:
    cfg = _pipeline_config(args)
    m, n, embs = embed_records(_records(args, ds), MnPolicy.parse(args.mn))
    X = np.vstack([e.vector() for e in embs])
    mu = np.zeros(X.shape[1])
    sd = np.ones(X.shape[1])
    if cfg.standardize:
        mu, sd = X.mean(axis=0), X.std(axis=0)
        sd[sd == 0] = 1.0
    Xs = (X - mu) / sd
    mcfg = MlpConfig(
        input_dim=X.shape[1], num_classes=ds.num_classes, hidden_dim=cfg.hidden,
        dropout=cfg.dropout, lr=cfg.lr, weight_decay=cfg.weight_decay,
        epochs=cfg.epochs, batch_size=cfg.batch_size, seed=cfg.seed,
    )
    model = train(Xs, ds.labels, mcfg)
    preds = predict(model, Xs)
    doc = {
        "meta": _meta(args, ds),
        "m": m,
        "n": n,
        "train_accuracy": float(np.mean(preds == ds.labels)),
        "train_weighted_f1": weighted_f1(preds, ds.labels),
        "loss_history": model.history,
        "standardize": {"mean": mu.tolist(), "std": sd.tolist()},
        "params": {k: v.tolist() for k, v in model.params().items()},
    }
    return json.dumps(doc, sort_keys=True) + "\n"


def cmd_crossval(args, ds) -> str:
    report, m, n = crossval(ds, _pipeline_config(args), workers=args.workers)
    doc = {"meta": _meta(args, ds), "m": m, "n": n, "protocol": args.protocol}
    doc.update(report.as_dict())
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def cmd_validate(args, ds) -> str:
    rep = validate(ds)
    doc = {
        "meta": _meta(args, ds),
        "ok": rep.ok,
        "totals": rep.totals(),
        "violations": [vars(v) for v in rep.violations],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


COMMANDS = {
    "extract": cmd_extract,
    "embed": cmd_embed,
    "betti": cmd_betti,
    "distance": cmd_distance,
    "barycenter": cmd_barycenter,
    "train": cmd_train,
    "crossval": cmd_crossval,
    "validate": cmd_validate,
}


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topofc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"topofc {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(SUBCOMMANDS) + "}")
    sub.required = True

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dataset", help="directory holding NAME_A.txt etc. (required)")
    common.add_argument("--name", help="dataset file prefix (default: directory name)")
    common.add_argument("--features", default="labels+ldp",
                        choices=["intrinsic", "labels", "ldp", "intrinsic+ldp", "labels+ldp"])
    common.add_argument("--mn", default="avg", help="max | min | avg | fixed:M,N")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=_positive_int, default=default_workers())
    common.add_argument("--out", help="output file (default: OUTPUT_DIR/NAME_COMMAND.EXT)")
    common.add_argument("--output-dir", default=".")
    common.add_argument("--config", help="JSON file with flag defaults; flags win")
    common.add_argument("-v", "--verbose", action="store_true")

    learner = argparse.ArgumentParser(add_help=False)
    learner.add_argument("--hidden", type=int, default=64, choices=[32, 64, 128])
    learner.add_argument("--lr", type=float, default=1e-3)
    learner.add_argument("--weight-decay", type=float, default=1e-4)
    learner.add_argument("--epochs", type=_positive_int, default=200)
    learner.add_argument("--dropout", type=float, default=0.3)
    learner.add_argument("--batch-size", type=_positive_int, default=64)
    learner.add_argument("--no-standardize", action="store_true")

    p = sub.add_parser("extract", parents=[common], help="per-graph birth/death sets")
    p.add_argument("--emit-fc", help="also write the FC matrix of --graph as CSV i,j,r")
    p.add_argument("--graph", type=int, default=0)

    sub.add_parser("embed", parents=[common], help="fixed-length topological embeddings")

    p = sub.add_parser("betti", parents=[common], help="Betti curves of one graph")
    p.add_argument("--graph", type=int, default=0)
    p.add_argument("--grid", default="weights", help="weights | uniform:K")
    p.add_argument("--emit-fc", help="also write the FC matrix as CSV i,j,r")

    p = sub.add_parser("distance", parents=[common], help="pairwise Wasserstein distances")
    p.add_argument("--p", type=float, default=1.0, choices=[1.0, 2.0])
    p.add_argument("--set", default="births", choices=["births", "deaths"])

    p = sub.add_parser("barycenter", parents=[common], help="per-class Wasserstein barycenter")
    p.add_argument("--class", dest="cls", type=int, required=True)
    p.add_argument("--set", default="births", choices=["births", "deaths"])
    p.add_argument("--resolution", type=_positive_int)

    sub.add_parser("train", parents=[common, learner], help="fit the MLP on the whole dataset")

    p = sub.add_parser("crossval", parents=[common, learner], help="cross-validated MLP accuracy")
    p.add_argument("--protocol", default="kfold:5", help="kfold:K | splits:N")

    sub.add_parser("validate", parents=[common], help="report dataset artifacts")
    return parser


def _load_config(argv: Sequence[str]) -> dict:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    path = Path(known.config)
    if not path.is_file():
        raise DataError(f"config file {path} does not exist")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise DataError(f"config file {path} must hold a JSON object")
    out = {}
    for k, v in data.items():
        key = k.lstrip("-").replace("-", "_")
        out["cls" if key == "class" else key] = v
    return out


def _fail(exc: BaseException, code: int) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
    return code


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        defaults = _load_config(argv)
    except TopoFCError as exc:
        return _fail(exc, exc.exit_code)
    if defaults:
        # subparsers keep their own defaults
        for sp in parser._subparsers._group_actions[0].choices.values():
            sp.set_defaults(**defaults)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not args.dataset:
        # may come from --config, so argparse cannot enforce it
        parser._subparsers._group_actions[0].choices[args.command].print_usage(sys.stderr)
        sys.stderr.write(f"topofc {args.command}: error: --dataset is required\n")
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        ds = parse_tudataset(args.dataset, args.name)
        text = COMMANDS[args.command](args, ds)
        if args.out == "-":
            sys.stdout.write(text)
            return 0
        out = Path(args.out) if args.out else Path(args.output_dir) / f"{ds.name}_{args.command}.{_EXT[args.command]}"
        write_atomic(out, text)
        log.info("wrote %s", out)
    except TopoFCError as exc:
        return _fail(exc, exc.exit_code)
    except IndexError as exc:
        return _fail(exc, 2)
    except (OSError, UnicodeDecodeError) as exc:
        return _fail(exc, 3)
    except (FloatingPointError, ArithmeticError) as exc:
        return _fail(exc, 4)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
