"""Command-line front end: cluster | specify | prototypes | classify | gen | bench.

Exit codes: 0 success, 2 parse/validation errors, 3 total-conflict failures,
4 unrepresentable subset.  `-` means stdin/stdout for file arguments.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import statistics
import sys

from . import bench as bench_mod
from . import fileio
from .core import TotalConflictError
from .generate import GenSpec, generate
from .classifier import classify_stream, rejection_threshold
from .metalevel import FitsNowhereError, specify_all
from .partition import Corpus, SearchConfig, minimize_metaconflict
from .prototypes import SubsetUnrepresentableError, build_model

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CONFLICT = 3
EXIT_UNREPRESENTABLE = 4


@contextlib.contextmanager
def _open_in(path: str):
    if path == "-":
        yield sys.stdin
    else:
        with open(path, "r", encoding="utf-8") as fp:
            yield fp


@contextlib.contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fp:
            yield fp


def _load_corpus(path: str) -> Corpus:
    with _open_in(path) as fp:
        return fileio.load_corpus(fp)


def _load_prior(path: str):
    with _open_in(path) as fp:
        return fileio.load_prior(fp)


def cmd_cluster(args) -> int:
    corpus = _load_corpus(args.evidence)
    prior = _load_prior(args.prior)
    config = SearchConfig(
        restarts=args.restarts,
        seed=args.seed,
        max_subsets=args.max_subsets,
        init=args.init,
    )
    partition, mcf = minimize_metaconflict(corpus, prior, config)
    with _open_out(args.out) as fp:
        fileio.write_partition(fp, partition, mcf)
    print(f"mcf={mcf!r} r={partition.r}", file=sys.stderr)
    return EXIT_OK


def cmd_specify(args) -> int:
    corpus = _load_corpus(args.evidence)
    prior = _load_prior(args.prior)
    with _open_in(args.partition) as fp:
        partition = fileio.load_partition(fp, corpus)
    report = specify_all(partition, prior)
    with _open_out(args.out) as fp:
        fileio.write_report(fp, report)
    return EXIT_OK


def cmd_prototypes(args) -> int:
    corpus = _load_corpus(args.evidence)
    prior = _load_prior(args.prior)
    with _open_in(args.partition) as fp:
        partition = fileio.load_partition(fp, corpus)
    report = specify_all(partition, prior)
    if args.n > len(corpus):
        print(
            f"warning: budget {args.n} exceeds corpus size; keeping everything",
            file=sys.stderr,
        )
    model = build_model(corpus, partition, prior, args.n, report=report)
    with _open_out(args.out) as fp:
        fileio.write_model(fp, model)
    for j, sub in enumerate(model.subsets):
        alphas = [report.row(eid).alpha[j] for eid in sub.prototype_ids]
        print(
            f"subset {j + 1}: prototypes={list(sub.prototype_ids)} "
            f"alphas={[round(a, 6) for a in alphas]} c_j={sub.conflict!r}",
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_classify(args) -> int:
    with _open_in(args.model) as fp:
        model = fileio.load_model(fp)
    rejection_threshold(model)  # surfaces prior problems before streaming
    with _open_in(args.evidence) as src, _open_out(args.out) as dst:
        items = fileio.iter_evidence(src, frame=model.frame)
        for result in classify_stream(model, items):
            rec = fileio.classification_record(result, timings=args.timings)
            dst.write(json.dumps(rec, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = GenSpec(
        labels=tuple(args.labels.split(",")),
        events=args.events,
        count=args.count,
        noise=args.noise,
        nonspecificity=args.nonspecificity,
        seed=args.seed,
    )
    corpus, truth = generate(spec)
    with _open_out(args.out) as fp:
        fileio.write_evidence(fp, corpus)
    truth_path = args.truth or (args.out + ".truth" if args.out != "-" else None)
    if truth_path:
        with _open_out(truth_path) as fp:
            for eid, event in zip(corpus.ids, truth):
                fp.write(json.dumps({"id": eid, "event": event}) + "\n")
    return EXIT_OK


def cmd_bench(args) -> int:
    corpus = _load_corpus(args.evidence)
    prior = _load_prior(args.prior)
    report = bench_mod.run_benchmark(
        corpus,
        prior,
        budget=args.n,
        holdout_fraction=args.holdout,
        seed=args.seed,
        restarts=args.restarts,
        max_subsets=args.max_subsets,
    )
    doc = {
        "n_train": report.n_train,
        "n_holdout": report.n_holdout,
        "train_mcf": report.train_mcf,
        "agreement": report.agreement,
        "items": [
            {
                "id": r.evidence_id,
                "proto_outcome": r.proto_outcome,
                "proto_subset": None if r.proto_subset is None else r.proto_subset + 1,
                "recluster": r.recluster_subset
                if isinstance(r.recluster_subset, str)
                else r.recluster_subset + 1,
                "agree": r.agree,
            }
            for r in report.results
        ],
    }
    with _open_out(args.out) as fp:
        json.dump(doc, fp, sort_keys=True)
        fp.write("\n")
    proto_us = [r.proto_seconds * 1e6 for r in report.results]
    back_us = [r.recluster_seconds * 1e6 for r in report.results]
    print(
        f"agreement={report.agreement:.3f} "
        f"proto_us(median)={statistics.median(proto_us):.1f} "
        f"recluster_us(median)={statistics.median(back_us):.1f}",
        file=sys.stderr,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dsproto",
        description="Conflict-based clustering of Dempster-Shafer evidence "
        "with prototype-based fast classification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="minimize the metaconflict criterion")
    p.add_argument("--evidence", required=True)
    p.add_argument("--prior", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-subsets", type=int, default=None)
    p.add_argument("--init", choices=["random", "singleton-greedy"], default="random")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("specify", help="per-evidence membership Bel/Pls/credibility")
    p.add_argument("--evidence", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--prior", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_specify)

    p = sub.add_parser("prototypes", help="select prototypes and build a model")
    p.add_argument("--evidence", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--prior", required=True)
    p.add_argument("--n", type=int, default=5, help="prototypes per subset")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_prototypes)

    p = sub.add_parser("classify", help="stream evidence against a model")
    p.add_argument("--model", required=True)
    p.add_argument("--evidence", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--timings", action="store_true",
                   help="include per-item micros (breaks byte determinism)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("gen", help="seeded synthetic evidence corpus")
    p.add_argument("--labels", required=True, help="comma-separated frame labels")
    p.add_argument("--events", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--nonspecificity", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.add_argument("--truth", default=None,
                   help="ground-truth sidecar path (default: OUT.truth)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="front/back agreement and latency benchmark")
    p.add_argument("--evidence", required=True)
    p.add_argument("--prior", required=True)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--holdout", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-subsets", type=int, default=None)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SubsetUnrepresentableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNREPRESENTABLE
    except (TotalConflictError, FitsNowhereError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFLICT
    except (fileio.ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
