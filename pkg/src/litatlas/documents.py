"""Publication records and their JSONL serialization.

A Document is one paper as normalized from a source API: identifier,
title, abstract and light metadata. The abstract is the only text the
downstream pipeline ever looks at.
"""
from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, asdict
from typing import Iterable, Iterator

from .errors import InvalidDocument

SOURCES = ("pubmed", "arxiv", "custom")

MIN_YEAR = 1800


def _max_year() -> int:
    return dt.date.today().year + 1


@dataclass(frozen=True)
class Document:
    """One publication record keyed by a source-prefixed id ("pubmed:12345")."""

    doc_id: str
    source: str
    title: str
    abstract_text: str
    authors: tuple[str, ...] = ()
    venue: str = ""
    published_year: int | None = None
    url: str = ""
    fetched_at: dt.datetime | None = None

    def __post_init__(self):
        object.__setattr__(self, "authors", tuple(self.authors))
        validate_document(self)


def validate_document(doc: Document) -> None:
    """Raise InvalidDocument unless the record is servable."""
    if not doc.doc_id or not doc.doc_id.strip():
        raise InvalidDocument(doc.doc_id, "doc_id is empty")
    if doc.source not in SOURCES:
        raise InvalidDocument(doc.doc_id, f"unknown source {doc.source!r}")
    if not doc.abstract_text or not doc.abstract_text.strip():
        raise InvalidDocument(doc.doc_id, "abstract is empty")
    if doc.published_year is not None:
        if not (MIN_YEAR <= doc.published_year <= _max_year()):
            raise InvalidDocument(
                doc.doc_id, f"published_year {doc.published_year} out of range"
            )


def document_to_json(doc: Document) -> dict:
    record = asdict(doc)
    record["authors"] = list(doc.authors)
    record["fetched_at"] = doc.fetched_at.isoformat() if doc.fetched_at else None
    return record


def document_from_json(record: dict) -> Document:
    fetched_at = record.get("fetched_at")
    return Document(
        doc_id=record["doc_id"],
        source=record["source"],
        title=record.get("title", ""),
        abstract_text=record["abstract_text"],
        authors=tuple(record.get("authors") or ()),
        venue=record.get("venue", ""),
        published_year=record.get("published_year"),
        url=record.get("url", ""),
        fetched_at=dt.datetime.fromisoformat(fetched_at) if fetched_at else None,
    )


def write_jsonl(docs: Iterable[Document], fh) -> None:
    for doc in docs:
        fh.write(json.dumps(document_to_json(doc), sort_keys=True) + "\n")


def read_jsonl(fh) -> Iterator[Document]:
    for line in fh:
        line = line.strip()
        if line:
            yield document_from_json(json.loads(line))


def utc_now() -> dt.datetime:
    return dt.datetime.now(dt.timezone.utc)
