"""Scriptable front door: augment, score, report, serve, export.

The unit of state is a session directory (--data D) holding the corpus, the
generated texts, the provenance ledger, metric sidecars and the event log, so
the CLI and the HTTP service interoperate on the same files. All randomness
flows from --seed; running the same command twice produces identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .corpus import CorpusError, load_dataset, merge_generated
from .features import compute_feature_sets
from .amr import PenmanError, load_amr_sidecar
from .guidance import GuidanceCache, GuidanceError, RemoteProvider, StubProvider
from .lexicon import LexiconError, load_lexicon
from .metrics import MetricsConfig, score_dataset
from .session import SessionCorruptionError, SessionError
from .store import SessionStore, StoreError, WriterConflict
from .transforms import (
    ALL_KINDS,
    GenerationPolicy,
    LedgerError,
    TransformKind,
    generate,
)

_USER_ERRORS = (
    CorpusError, LexiconError, PenmanError, GuidanceError, LedgerError,
    SessionError, SessionCorruptionError, StoreError, ValueError, OSError,
)


def _parse_kinds(spec: str) -> tuple[TransformKind, ...]:
    if spec.strip().lower() == "all":
        return ALL_KINDS
    kinds = []
    for name in spec.split(","):
        name = name.strip()
        if name not in TransformKind.__members__:
            valid = ", ".join(k.value for k in ALL_KINDS)
            raise CorpusError(f"unknown transform {name!r}; valid names: {valid}")
        kinds.append(TransformKind(name))
    if not kinds:
        raise CorpusError("no transforms given")
    return tuple(kinds)


def _print_table(rows: list[list[str]], header: list[str]) -> None:
    table = [header] + rows
    widths = [max(len(str(row[col])) for row in table) for col in range(len(header))]
    for index, row in enumerate(table):
        line = "  ".join(str(cell).ljust(width) for cell, width in zip(row, widths))
        print(line.rstrip())
        if index == 0:
            print("  ".join("-" * width for width in widths))


def cmd_augment(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.input, format=args.format)
    lexicon = load_lexicon(args.lexicon)
    policy = GenerationPolicy(
        kinds=_parse_kinds(args.transforms),
        per_original=args.per_original,
        chain_length=args.chain_length,
    )
    result = generate(dataset, policy, args.seed, lexicon)
    merge_generated(dataset, [inst for inst, _ in result.pairs])  # invariant check

    store = SessionStore(args.output)
    store.init_dir()
    store.write_meta({
        "name": dataset.name,
        "label_set": list(dataset.label_set),
        "seed": args.seed,
        "policy": {
            "transforms": [k.value for k in policy.kinds],
            "per_original": policy.per_original,
            "chain_length": policy.chain_length,
        },
    })
    store.write_originals(dataset)
    store.write_generated(result.pairs)

    counts = result.kind_counts()
    rows = [[kind.value, str(counts[kind])] for kind in ALL_KINDS]
    rows.append(["total", str(sum(counts.values()))])
    _print_table(rows, ["transform", "count"])
    if result.skipped:
        print(f"skipped {len(result.skipped)} originals with no applicable transform")
    print(f"wrote {len(result.pairs)} generated instances to {store.root}")
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    store = SessionStore(args.data)
    dataset = store.load_dataset()
    meta = store.read_meta()
    config = MetricsConfig(
        order=args.order, k=args.smoothing, folds=args.folds, seed=args.seed
    )
    run = score_dataset(dataset, config)
    meta["metrics"] = {
        "order": config.order, "k": config.k, "folds": config.folds,
        "lo_percentile": config.lo_percentile, "hi_percentile": config.hi_percentile,
        "seed": config.seed,
    }
    store.write_meta(meta)
    store.write_score_run(run.scores, run.calibration)
    flagged = len(run.joint.issues)
    print(f"scored {len(run.scores)} instances; {flagged} flagged as possible label issues")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    store = SessionStore(args.data)
    if not store.scores_path.exists():
        raise StoreError(f"{store.scores_path} missing; run `auginspect score --data {args.data}` first")
    dataset = store.load_dataset()
    chains = store.load_chains()
    scores = store.load_scores()

    rows = []
    for kind in ALL_KINDS:
        member_scores = [
            scores[i]
            for i, chain in chains.items()
            if kind in chain.kinds() and i in scores
        ]
        if member_scores:
            n = len(member_scores)
            rows.append([
                kind.value,
                str(n),
                f"{sum(s.fluency for s in member_scores) / n:.3f}",
                f"{sum(s.grammaticality for s in member_scores) / n:.3f}",
                f"{sum(s.alignment for s in member_scores) / n:.3f}",
            ])
        else:
            rows.append([kind.value, "0", "-", "-", "-"])
    _print_table(rows, ["transform", "count", "fluency", "grammaticality", "alignment"])
    print(f"dataset: {dataset.name} ({len(dataset.originals())} originals, "
          f"{len(dataset.generated())} generated)")
    return 0


def build_provider(spec: str | None):
    if spec is None:
        return None
    mode, _, arg = spec.partition(":")
    if mode == "stub":
        if not arg:
            raise GuidanceError("--llm stub needs a rules file: stub:<rules file>")
        return StubProvider.from_file(arg)
    if mode == "remote":
        if not arg:
            raise GuidanceError("--llm remote needs a URL: remote:<url>")
        return RemoteProvider(url=arg, api_key=os.environ.get("AUGINSPECT_LLM_KEY"))
    raise GuidanceError(f"unknown --llm mode {mode!r}; use stub:<rules file> or remote:<url>")


def build_app(args: argparse.Namespace):
    """Assemble the service app from CLI flags (shared by serve and tests)."""
    store = SessionStore(args.data)
    if getattr(args, "lexicon", None):
        load_lexicon(args.lexicon)  # fail fast on a bad path before binding the port
    graphs = load_amr_sidecar(args.amr_sidecar) if args.amr_sidecar else None
    dataset = store.load_dataset()
    features = compute_feature_sets(dataset, graphs)
    store.acquire_writer()
    session = store.load_session(features=features)
    provider = build_provider(args.llm)
    cache = GuidanceCache(store.root / "guidance_cache") if provider else None

    from .service import create_app

    return create_app(session, store=store, provider=provider, guidance_cache=cache), store


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    app, store = build_app(args)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    finally:
        store.release_writer()
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    store = SessionStore(args.data)
    session = store.load_session(attach_sink=False)
    data = session.export_bytes()
    Path(args.out).write_bytes(data)
    count = len(session.export_rows())
    print(f"exported {count} accepted instances to {args.out}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="auginspect", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_augment = sub.add_parser("augment", help="generate transformed texts with provenance")
    p_augment.add_argument("--input", required=True, help="dataset file (jsonl/csv/tsv)")
    p_augment.add_argument("--output", required=True, help="session directory to create")
    p_augment.add_argument("--transforms", default="all", help="comma-separated kinds or 'all'")
    p_augment.add_argument("--per-original", type=int, default=1, dest="per_original")
    p_augment.add_argument("--chain-length", type=int, default=1, dest="chain_length")
    p_augment.add_argument("--seed", type=int, default=0)
    p_augment.add_argument("--lexicon", default=None, help="lexicon file (defaults bundled)")
    p_augment.add_argument("--format", default=None, choices=("jsonl", "csv", "tsv"))
    p_augment.set_defaults(func=cmd_augment)

    p_score = sub.add_parser("score", help="compute quality metric sidecar")
    p_score.add_argument("--data", required=True, help="session directory")
    p_score.add_argument("--folds", type=int, default=5)
    p_score.add_argument("--order", type=int, default=3)
    p_score.add_argument("--smoothing", type=float, default=0.1)
    p_score.add_argument("--seed", type=int, default=0)
    p_score.set_defaults(func=cmd_score)

    p_report = sub.add_parser("report", help="per-transform score summary")
    p_report.add_argument("--data", required=True)
    p_report.set_defaults(func=cmd_report)

    p_serve = sub.add_parser("serve", help="run the inspection API server")
    p_serve.add_argument("--data", required=True)
    p_serve.add_argument("--port", type=int, default=8008)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--amr-sidecar", default=None, dest="amr_sidecar")
    p_serve.add_argument("--lexicon", default=None, help="lexicon file to validate on startup")
    p_serve.add_argument("--llm", default=None, help="stub:<rules file> or remote:<url>")
    p_serve.set_defaults(func=cmd_serve)

    p_export = sub.add_parser("export", help="write the accepted set as JSONL")
    p_export.add_argument("--data", required=True)
    p_export.add_argument("--out", required=True)
    p_export.set_defaults(func=cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WriterConflict as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except _USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
