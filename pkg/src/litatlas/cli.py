"""Command-line pipeline: ingest sources, build snapshots, serve the API.

The store location (--store) may be a local directory or the base URL of
a running service; with a URL the freshly built snapshot is uploaded and
installed remotely, so heavy builds can run on a local machine while the
service lives elsewhere. The LITATLAS_STORE environment variable
overrides the store location for both build and serve.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
import tarfile
import tempfile
from pathlib import Path

from .config import PipelineConfig
from .documents import read_jsonl
from .errors import LitatlasError
from .ingest import fetch
from .pipeline import build_snapshot
from .store import CorpusStore, save_snapshot, snapshot_version

log = logging.getLogger(__name__)

DEFAULT_CORPUS = "data/corpus.jsonl"
DEFAULT_STORE = "data/snapshot"


def _load_config(path: str | None) -> PipelineConfig:
    if not path:
        return PipelineConfig()
    with open(path, encoding="utf-8") as fh:
        return PipelineConfig.from_json(json.load(fh))


def _store_location(args) -> str:
    return os.environ.get("LITATLAS_STORE") or args.store


def cmd_ingest(args) -> int:
    config = _load_config(args.config)
    corpus = CorpusStore(args.corpus)
    total_inserted = total_updated = 0
    if args.jsonl:
        with open(args.jsonl, encoding="utf-8") as fh:
            docs = list(read_jsonl(fh))
        inserted, updated = corpus.upsert(docs)
        total_inserted, total_updated = inserted, updated
        print(f"{args.jsonl}: {inserted} inserted, {updated} updated")
    else:
        if not config.source_queries:
            print("no source_queries in config and no --jsonl given", file=sys.stderr)
            return 2
        for query in config.source_queries:
            result = fetch(query)
            inserted, updated = corpus.upsert(result.documents)
            total_inserted += inserted
            total_updated += updated
            r = result.report
            print(
                f"{query.source} {query.query_string!r}: fetched {r.fetched}, "
                f"skipped {r.skipped_no_abstract} without abstract, "
                f"{r.skipped_malformed} malformed; "
                f"{inserted} inserted, {updated} updated"
            )
    print(f"corpus now holds {len(corpus.load())} documents at {args.corpus}")
    return 0


def _upload_snapshot(snapshot_dir: Path, base_url: str) -> None:
    import httpx

    buffer = io.BytesIO()
    with tarfile.open(fileobj=buffer, mode="w:gz") as archive:
        for name in sorted(p.name for p in snapshot_dir.iterdir()):
            archive.add(snapshot_dir / name, arcname=name)
    response = httpx.post(
        base_url.rstrip("/") + "/api/snapshot",
        content=buffer.getvalue(),
        headers={"content-type": "application/gzip"},
        timeout=300.0,
    )
    response.raise_for_status()
    print(f"installed remotely: {response.json()}")


def cmd_build(args) -> int:
    config = _load_config(args.config)
    store = _store_location(args)
    docs = CorpusStore(args.corpus).load()
    remote = store.startswith("http://") or store.startswith("https://")

    if remote:
        import httpx

        version = 1
        try:
            health = httpx.get(store.rstrip("/") + "/api/health", timeout=30.0)
            if health.status_code == 200:
                version = int(health.json()["corpus_version"]) + 1
        except httpx.HTTPError:
            log.warning("could not read remote version, starting at 1")
        snapshot = build_snapshot(docs, config, corpus_version=version)
        with tempfile.TemporaryDirectory() as staging:
            local = Path(staging) / "snapshot"
            save_snapshot(snapshot, local)
            _upload_snapshot(local, store)
    else:
        target = Path(store)
        prior = snapshot_version(target)
        version = (prior or 0) + 1
        snapshot = build_snapshot(docs, config, corpus_version=version)
        checksum = save_snapshot(snapshot, target)
        print(f"snapshot v{version} written to {target} (checksum {checksum[:12]}...)")
    for warning in snapshot.build_warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    snapshot_dir = os.environ.get("LITATLAS_STORE") or args.snapshot
    host, _, port = args.bind.rpartition(":")
    app = create_app(
        snapshot_dir,
        state_dir=args.state_dir,
        static_dir=args.static_dir,
        similar_display=args.similar_display,
    )
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="litatlas")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="fetch documents into the corpus")
    p_ingest.add_argument("--config", help="pipeline config JSON")
    p_ingest.add_argument("--corpus", default=DEFAULT_CORPUS)
    p_ingest.add_argument("--jsonl", help="load documents from a JSONL file instead of the network")
    p_ingest.set_defaults(func=cmd_ingest)

    p_build = sub.add_parser("build", help="build a model snapshot from the corpus")
    p_build.add_argument("--config", help="pipeline config JSON")
    p_build.add_argument("--corpus", default=DEFAULT_CORPUS)
    p_build.add_argument("--store", default=DEFAULT_STORE, help="snapshot directory or service URL")
    p_build.set_defaults(func=cmd_build)

    p_serve = sub.add_parser("serve", help="serve the REST API over a snapshot")
    p_serve.add_argument("--snapshot", default=DEFAULT_STORE)
    p_serve.add_argument("--bind", default="127.0.0.1:8000")
    p_serve.add_argument("--state-dir", default=None)
    p_serve.add_argument("--static-dir", default=None)
    p_serve.add_argument("--similar-display", type=int, default=10)
    p_serve.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except LitatlasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
