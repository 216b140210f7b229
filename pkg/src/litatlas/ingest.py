"""Harvest paper metadata from PubMed- and arXiv-style APIs.

Both clients page through results, space requests by a per-source polite
delay, and retry transient failures with exponential backoff. The
transport is injected so parser and fetch tests replay recorded
responses offline. Records without an abstract are skipped and counted,
never emitted: every Document returned here satisfies the corpus
invariants.
"""
from __future__ import annotations

import datetime as dt
import logging
import re
import time
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Callable, Mapping, Protocol

from .documents import Document, utc_now
from .errors import InvalidDocument, MalformedResponse, TransportError

log = logging.getLogger(__name__)

PUBMED_ESEARCH = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/esearch.fcgi"
PUBMED_EFETCH = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/efetch.fcgi"
ARXIV_QUERY = "https://export.arxiv.org/api/query"

# published API etiquette: ~3 req/s for PubMed without a key, 1 req/3s for arXiv
DEFAULT_DELAY_MS = {"pubmed": 350, "arxiv": 3000}

PAGE_SIZE = 100
MAX_ATTEMPTS = 3
BACKOFF_BASE_S = 0.5

_ATOM_NS = "{http://www.w3.org/2005/Atom}"
_ARXIV_VERSION_RE = re.compile(r"v\d+$")


@dataclass(frozen=True)
class SourceQuery:
    source: str
    query_string: str
    max_results: int
    date_from: dt.date | None = None
    date_to: dt.date | None = None
    polite_delay_ms: int | None = None

    def __post_init__(self):
        if self.source not in ("pubmed", "arxiv"):
            raise ValueError(f"source must be pubmed or arxiv, got {self.source!r}")
        if self.max_results < 1:
            raise ValueError("max_results must be >= 1")
        if self.date_from and self.date_to and self.date_from > self.date_to:
            raise ValueError("date_from must not be after date_to")
        if self.polite_delay_ms is not None and self.polite_delay_ms < 0:
            raise ValueError("polite_delay_ms must be non-negative")

    @property
    def delay_ms(self) -> int:
        if self.polite_delay_ms is not None:
            return self.polite_delay_ms
        return DEFAULT_DELAY_MS[self.source]

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "query_string": self.query_string,
            "max_results": self.max_results,
            "date_from": self.date_from.isoformat() if self.date_from else None,
            "date_to": self.date_to.isoformat() if self.date_to else None,
            "polite_delay_ms": self.polite_delay_ms,
        }

    @classmethod
    def from_json(cls, record: dict) -> "SourceQuery":
        return cls(
            source=record["source"],
            query_string=record["query_string"],
            max_results=record["max_results"],
            date_from=dt.date.fromisoformat(record["date_from"]) if record.get("date_from") else None,
            date_to=dt.date.fromisoformat(record["date_to"]) if record.get("date_to") else None,
            polite_delay_ms=record.get("polite_delay_ms"),
        )


class Transport(Protocol):
    """Minimal HTTP-get contract; returns (status_code, body bytes)."""

    def get(self, url: str, params: Mapping[str, str]) -> tuple[int, bytes]: ...


class HttpxTransport:
    def __init__(self, timeout_s: float = 30.0):
        self.timeout_s = timeout_s

    def get(self, url: str, params: Mapping[str, str]) -> tuple[int, bytes]:
        import httpx

        response = httpx.get(url, params=dict(params), timeout=self.timeout_s)
        return response.status_code, response.content


@dataclass
class FetchReport:
    requested: int = 0
    fetched: int = 0
    skipped_no_abstract: int = 0
    skipped_malformed: int = 0
    requests_made: int = 0


@dataclass
class FetchResult:
    documents: list[Document]
    report: FetchReport


def _request(
    transport: Transport,
    url: str,
    params: Mapping[str, str],
    sleep: Callable[[float], None],
) -> bytes:
    """GET with bounded retries: 3 attempts with backoff on 5xx/exceptions, 4xx fail fast."""
    last_status = None
    for attempt in range(MAX_ATTEMPTS):
        try:
            status, body = transport.get(url, params)
        except Exception as exc:  # connection errors, timeouts
            last_status = f"exception: {exc}"
            if attempt + 1 < MAX_ATTEMPTS:
                sleep(BACKOFF_BASE_S * 2**attempt)
                continue
            raise TransportError("n/a", str(exc)) from exc
        if status < 400:
            return body
        if 400 <= status < 500:
            raise TransportError(status, f"client error from {url}")
        last_status = status
        if attempt + 1 < MAX_ATTEMPTS:
            sleep(BACKOFF_BASE_S * 2**attempt)
    raise TransportError(last_status, f"gave up after {MAX_ATTEMPTS} attempts at {url}")


def fetch(
    source_query: SourceQuery,
    transport: Transport | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> FetchResult:
    """Run a source query, returning at most max_results valid Documents."""
    if transport is None:
        transport = HttpxTransport()
    if source_query.source == "pubmed":
        return _fetch_pubmed(source_query, transport, sleep)
    return _fetch_arxiv(source_query, transport, sleep)


def _pause(query: SourceQuery, report: FetchReport, sleep: Callable[[float], None]) -> None:
    if report.requests_made > 0 and query.delay_ms > 0:
        sleep(query.delay_ms / 1000.0)
    report.requests_made += 1


def _fetch_pubmed(query: SourceQuery, transport: Transport, sleep) -> FetchResult:
    report = FetchReport(requested=query.max_results)
    params = {
        "db": "pubmed",
        "term": query.query_string,
        "retmax": str(query.max_results),
        "retmode": "json",
    }
    if query.date_from or query.date_to:
        params["datetype"] = "pdat"
        if query.date_from:
            params["mindate"] = query.date_from.strftime("%Y/%m/%d")
        if query.date_to:
            params["maxdate"] = query.date_to.strftime("%Y/%m/%d")
    _pause(query, report, sleep)
    body = _request(transport, PUBMED_ESEARCH, params, sleep)
    try:
        import json

        id_list = json.loads(body)["esearchresult"]["idlist"]
    except (ValueError, KeyError) as exc:
        raise MalformedResponse(f"esearch payload: {exc}") from exc

    documents: list[Document] = []
    for start in range(0, len(id_list), PAGE_SIZE):
        batch = id_list[start : start + PAGE_SIZE]
        _pause(query, report, sleep)
        body = _request(
            transport,
            PUBMED_EFETCH,
            {
                "db": "pubmed",
                "id": ",".join(batch),
                "rettype": "abstract",
                "retmode": "xml",
            },
            sleep,
        )
        docs, skipped = _parse_pubmed(body)
        report.skipped_no_abstract += skipped.get("no_abstract", 0)
        report.skipped_malformed += skipped.get("malformed", 0)
        documents.extend(docs)
    documents = documents[: query.max_results]
    report.fetched = len(documents)
    return FetchResult(documents=documents, report=report)


def _fetch_arxiv(query: SourceQuery, transport: Transport, sleep) -> FetchResult:
    report = FetchReport(requested=query.max_results)
    documents: list[Document] = []
    start = 0
    while len(documents) < query.max_results:
        page = min(PAGE_SIZE, query.max_results - len(documents))
        _pause(query, report, sleep)
        body = _request(
            transport,
            ARXIV_QUERY,
            {
                "search_query": query.query_string,
                "start": str(start),
                "max_results": str(page),
            },
            sleep,
        )
        docs, skipped = _parse_arxiv(body)
        report.skipped_no_abstract += skipped.get("no_abstract", 0)
        report.skipped_malformed += skipped.get("malformed", 0)
        if not docs and not any(skipped.values()):
            break  # feed exhausted
        documents.extend(docs)
        start += page
        if len(docs) + sum(skipped.values()) < page:
            break
    documents = documents[: query.max_results]
    report.fetched = len(documents)
    return FetchResult(documents=documents, report=report)


def _normalize_ws(text: str | None) -> str:
    return " ".join((text or "").split())


def parse_pubmed_xml(payload: bytes, fetched_at: dt.datetime | None = None) -> list[Document]:
    """Documents from an efetch XML result set; abstract sections joined by spaces."""
    docs, _ = _parse_pubmed(payload, fetched_at)
    return docs


def _parse_pubmed(
    payload: bytes, fetched_at: dt.datetime | None = None
) -> tuple[list[Document], dict[str, int]]:
    stamp = fetched_at or utc_now()
    try:
        root = ET.fromstring(payload)
    except ET.ParseError as exc:
        raise MalformedResponse(f"not parseable XML: {exc}") from exc
    if root.tag != "PubmedArticleSet":
        raise MalformedResponse(f"expected PubmedArticleSet, got {root.tag}")
    docs: list[Document] = []
    skipped = {"no_abstract": 0, "malformed": 0}
    for article in root.iter("PubmedArticle"):
        pmid = article.findtext("MedlineCitation/PMID")
        if not pmid:
            log.warning("skipping record without PMID")
            skipped["malformed"] += 1
            continue
        node = article.find("MedlineCitation/Article")
        if node is None:
            log.warning("skipping %s: no Article element", pmid)
            skipped["malformed"] += 1
            continue
        # labeled sections (BACKGROUND, METHODS, ...) are structure, not
        # content: concatenate their texts with single spaces, labels dropped
        sections = [
            _normalize_ws("".join(part.itertext()))
            for part in node.findall("Abstract/AbstractText")
        ]
        abstract = " ".join(s for s in sections if s)
        if not abstract:
            log.info("skipping %s: no abstract", pmid)
            skipped["no_abstract"] += 1
            continue
        authors = []
        for author in node.findall("AuthorList/Author"):
            last = _normalize_ws(author.findtext("LastName"))
            fore = _normalize_ws(author.findtext("ForeName"))
            name = " ".join(p for p in (fore, last) if p) or _normalize_ws(
                author.findtext("CollectiveName")
            )
            if name:
                authors.append(name)
        year_text = node.findtext("Journal/JournalIssue/PubDate/Year")
        if not year_text:
            medline_date = node.findtext("Journal/JournalIssue/PubDate/MedlineDate") or ""
            match = re.search(r"\b(1[89]\d\d|20\d\d)\b", medline_date)
            year_text = match.group(0) if match else None
        try:
            docs.append(
                Document(
                    doc_id=f"pubmed:{pmid}",
                    source="pubmed",
                    title=_normalize_ws("".join(node.find("ArticleTitle").itertext()))
                    if node.find("ArticleTitle") is not None
                    else "",
                    abstract_text=abstract,
                    authors=tuple(authors),
                    venue=_normalize_ws(node.findtext("Journal/Title")),
                    published_year=int(year_text) if year_text else None,
                    url=f"https://pubmed.ncbi.nlm.nih.gov/{pmid}/",
                    fetched_at=stamp,
                )
            )
        except InvalidDocument as exc:
            log.warning("skipping %s: %s", pmid, exc)
            skipped["malformed"] += 1
    return docs, skipped


def strip_arxiv_version(raw_id: str) -> str:
    return _ARXIV_VERSION_RE.sub("", raw_id)


def parse_arxiv_atom(payload: bytes, fetched_at: dt.datetime | None = None) -> list[Document]:
    """Documents from an arXiv Atom feed; entry version suffixes are stripped."""
    docs, _ = _parse_arxiv(payload, fetched_at)
    return docs


def _parse_arxiv(
    payload: bytes, fetched_at: dt.datetime | None = None
) -> tuple[list[Document], dict[str, int]]:
    stamp = fetched_at or utc_now()
    try:
        root = ET.fromstring(payload)
    except ET.ParseError as exc:
        raise MalformedResponse(f"not parseable XML: {exc}") from exc
    if root.tag != f"{_ATOM_NS}feed":
        raise MalformedResponse(f"expected an Atom feed, got {root.tag}")
    docs: list[Document] = []
    skipped = {"no_abstract": 0, "malformed": 0}
    for entry in root.findall(f"{_ATOM_NS}entry"):
        raw_id = (entry.findtext(f"{_ATOM_NS}id") or "").strip()
        arxiv_id = strip_arxiv_version(raw_id.rsplit("/abs/", 1)[-1]) if raw_id else ""
        if not arxiv_id:
            log.warning("skipping arXiv entry without id")
            skipped["malformed"] += 1
            continue
        summary = _normalize_ws(entry.findtext(f"{_ATOM_NS}summary"))
        if not summary:
            log.info("skipping %s: empty summary", arxiv_id)
            skipped["no_abstract"] += 1
            continue
        category = entry.find("{http://arxiv.org/schemas/atom}primary_category")
        published = entry.findtext(f"{_ATOM_NS}published") or ""
        year = None
        if len(published) >= 4 and published[:4].isdigit():
            year = int(published[:4])
        authors = [
            _normalize_ws(name.text)
            for name in entry.findall(f"{_ATOM_NS}author/{_ATOM_NS}name")
            if _normalize_ws(name.text)
        ]
        try:
            docs.append(
                Document(
                    doc_id=f"arxiv:{arxiv_id}",
                    source="arxiv",
                    title=_normalize_ws(entry.findtext(f"{_ATOM_NS}title")),
                    abstract_text=summary,
                    authors=tuple(authors),
                    venue=category.get("term", "") if category is not None else "",
                    published_year=year,
                    url=raw_id,
                    fetched_at=stamp,
                )
            )
        except InvalidDocument as exc:
            log.warning("skipping %s: %s", arxiv_id, exc)
            skipped["malformed"] += 1
    return docs, skipped
