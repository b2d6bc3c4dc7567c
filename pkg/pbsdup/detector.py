#
# Copyright (C) 2026 The pbsdup Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Seed-and-merge duplicate detection over a corpus database.

A query is cut into overlapping k-word seeds, every seed is matched exactly
against the FM-index and seeds that sit on the same diagonal of the same
reference document are merged. Short mismatch gaps are bridged; merged regions
shorter than the reporting threshold are dropped.
"""
from __future__ import annotations

import collections
from dataclasses import dataclass, field
import itertools
import logging
import operator
from typing import Any, DefaultDict, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from pbsdup.config import Settings
from pbsdup.corpus import CorpusDb
from pbsdup.encoder import DEFAULT_ALPHABET, Alphabet, PbsDocument
from pbsdup.errors import UsageError


DEFAULT_SEED_K = 8
DEFAULT_MAX_GAP = 3
DEFAULT_MIN_REPORT = 12


def logger() -> logging.Logger:
    """Returns the module logger."""
    return logging.getLogger(__name__)


@dataclass(frozen=True)
class SeedHit:
    """An exact k-word match. ref_start is a global database position."""

    query_start: int
    ref_start: int
    length: int
    doc_id: int = 0

    @property
    def diagonal(self) -> int:
        return self.ref_start - self.query_start


@dataclass(frozen=True)
class MatchRecord:
    """A merged duplicate region. Reference positions are document-local."""

    query_start: int
    query_end: int
    ref_doc_id: int
    ref_start: int
    ref_end: int
    mismatch_gaps: Tuple[int, ...] = ()
    matched_runs: Tuple[int, ...] = ()

    @property
    def span(self) -> int:
        return self.query_end - self.query_start

    @property
    def matched_words(self) -> int:
        return self.span - sum(self.mismatch_gaps)

    @property
    def ccw(self) -> int:
        """Longest run of consecutive identical words in this region."""
        return max(self.matched_runs, default=0)


@dataclass(frozen=True)
class PlagiarismReport:
    doc_id: str
    query_word_count: int
    matches: List[MatchRecord] = field(default_factory=list)
    longest_ccw: int = 0
    coverage_percent: float = 0.0


def split_kmers(pbs: str, k: int) -> List[Tuple[int, str]]:
    """Overlapping k-mers at stride 1.

    >>> split_kmers("ACDEG", 4)
    [(0, 'ACDE'), (1, 'CDEG')]
    """
    if k < 1:
        raise ValueError(f"k must be positive: {k}")
    return [(i, pbs[i : i + k]) for i in range(len(pbs) - k + 1)]


def seed_search(
    db: CorpusDb, pbs: str, k: int, exclude_doc: Optional[int] = None
) -> List[SeedHit]:
    """Finds every exact occurrence of every k-mer of pbs in db.

    Hits that run across a document boundary are discarded. When exclude_doc
    is given, hits on that document at the query's own position are dropped.
    All k-mers are searched in one batch.
    """
    kmers = split_kmers(pbs, k)
    found = db.index.find_many([kmer for _, kmer in kmers])
    hits: List[SeedHit] = []
    dropped = 0
    for (query_start, _), positions in zip(kmers, found):
        for ref_start in positions:
            doc_id, local = db.resolve(ref_start)
            if local + k > db.registry[doc_id].word_count:
                dropped += 1
                continue
            if doc_id == exclude_doc and local == query_start:
                continue
            hits.append(SeedHit(query_start, ref_start, k, doc_id))
    logger().debug(
        "%d seed hits (%d across document boundaries)", len(hits), dropped
    )
    return hits


def _split_runs(query: str, reference: str) -> Tuple[List[int], List[int]]:
    """Lengths of the differing gaps and of the equal runs around them.

    >>> _split_runs("ABCDE", "AXCYE")
    ([1, 1], [1, 1, 1])
    """
    gaps: List[int] = []
    runs: List[int] = []
    for same, group in itertools.groupby(map(operator.eq, query, reference)):
        (runs if same else gaps).append(sum(1 for _ in group))
    return gaps, runs


def _merge_group(
    group: List[SeedHit],
    doc_id: int,
    doc_offset: int,
    max_gap: int,
    min_report: int,
    query: Optional[str] = None,
    reference: str = "",
) -> List[MatchRecord]:
    """Merges the hits of one (document, diagonal) group, sorted by query.

    With the query text at hand, the words between seeds are compared with
    the reference and only those that differ are kept as gap words.
    """
    diagonal = group[0].diagonal
    spans: List[Tuple[int, int, List[int], List[int]]] = []
    start = group[0].query_start
    end = start + group[0].length
    gaps: List[int] = []
    runs: List[int] = [group[0].length]
    for hit in group[1:]:
        hit_end = hit.query_start + hit.length
        if hit.query_start <= end:
            if hit_end > end:
                runs[-1] += hit_end - end
                end = hit_end
        elif hit.query_start - end <= max_gap:
            gaps.append(hit.query_start - end)
            runs.append(hit.length)
            end = hit_end
        else:
            spans.append((start, end, gaps, runs))
            start = hit.query_start
            end = hit_end
            gaps = []
            runs = [hit.length]
    spans.append((start, end, gaps, runs))

    records = []
    for start, end, gaps, runs in spans:
        if end - start < min_report:
            continue
        if query is not None and gaps:
            gaps, runs = _split_runs(
                query[start:end], reference[start + diagonal : end + diagonal]
            )
        ref_start = start + diagonal - doc_offset
        records.append(
            MatchRecord(
                start,
                end,
                doc_id,
                ref_start,
                ref_start + end - start,
                tuple(gaps),
                tuple(runs),
            )
        )
    return records


def merge_hits(
    hits: Iterable[SeedHit],
    db: CorpusDb,
    max_gap: int = DEFAULT_MAX_GAP,
    min_report: int = DEFAULT_MIN_REPORT,
    query: Optional[str] = None,
) -> List[MatchRecord]:
    """Merges co-diagonal seeds into duplicate regions.

    Seeds on the same document and diagonal whose query intervals overlap or
    abut are joined; seeds separated by up to max_gap words are joined with
    the gap recorded. Regions spanning fewer than min_report words are
    dropped. Given the query text, gap words equal to their reference word
    count as matched.
    """
    groups: DefaultDict[Tuple[int, int], List[SeedHit]] = collections.defaultdict(
        list
    )
    for hit in hits:
        groups[(hit.doc_id, hit.diagonal)].append(hit)

    reference = db.text if query is not None else ""
    records: List[MatchRecord] = []
    for (doc_id, _), group in groups.items():
        group.sort(key=lambda h: h.query_start)
        records.extend(
            _merge_group(
                group,
                doc_id,
                db.registry[doc_id].word_offset,
                max_gap,
                min_report,
                query,
                reference,
            )
        )
    records.sort(key=lambda r: (r.query_start, r.ref_doc_id, r.ref_start))
    return records


def score(
    records: Sequence[MatchRecord], query_word_count: int, doc_id: str = ""
) -> PlagiarismReport:
    """Computes longest CCW and copy coverage for a query's records."""
    covered = np.zeros(query_word_count, dtype=bool)
    for record in records:
        covered[record.query_start : record.query_end] = True
    coverage = (
        100.0 * int(covered.sum()) / query_word_count if query_word_count else 0.0
    )
    return PlagiarismReport(
        doc_id,
        query_word_count,
        list(records),
        max((r.ccw for r in records), default=0),
        coverage,
    )


def search(
    db: CorpusDb, doc: PbsDocument, settings: Settings = Settings()
) -> PlagiarismReport:
    """Runs the full detection pipeline for one query against db."""
    hits = seed_search(db, doc.pbs, settings.seed_k)
    records = merge_hits(
        hits, db, settings.max_gap, settings.min_report, query=doc.pbs
    )
    return score(records, len(doc.pbs), doc.id)


def _pairwise(
    docs: Sequence[PbsDocument], settings: Settings, alphabet: Alphabet
) -> Tuple[Dict[str, PlagiarismReport], CorpusDb]:
    if len(docs) < 2:
        raise UsageError(
            f"pairwise comparison needs at least 2 documents, got {len(docs)}"
        )
    ids = [doc.id for doc in docs]
    if len(set(ids)) != len(ids):
        raise UsageError("document ids must be unique")

    db = CorpusDb.from_pbs(
        docs, alphabet, occ_rate=settings.occ_rate, sa_rate=settings.sa_rate
    )
    reports: Dict[str, PlagiarismReport] = {}
    for doc_id, doc in enumerate(docs):
        hits = seed_search(db, doc.pbs, settings.seed_k, exclude_doc=doc_id)
        records = merge_hits(
            hits, db, settings.max_gap, settings.min_report, query=doc.pbs
        )
        reports[doc.id] = score(records, len(doc.pbs), doc.id)
    return reports, db


def pairwise(
    docs: Sequence[PbsDocument],
    settings: Settings = Settings(),
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> Dict[str, PlagiarismReport]:
    """Compares every document with every other through a temporary database.

    A document's hits on itself at its own position are ignored; repeated
    passages inside one document still match each other.

    Raises:
        UsageError: Fewer than two documents, or duplicate ids.
    """
    reports, _ = _pairwise(docs, settings, alphabet)
    return reports


def pairwise_metadata(
    docs: Sequence[PbsDocument],
    settings: Settings = Settings(),
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> List[Dict[str, Any]]:
    """Runs pairwise() and renders one metadata document per input, in order."""
    reports, db = _pairwise(docs, settings, alphabet)
    return [to_metadata(reports[doc.id], db, snippets=False) for doc in docs]


def rank_reports(reports: Iterable[PlagiarismReport]) -> List[PlagiarismReport]:
    """Orders reports by longest CCW, then coverage, highest first."""
    return sorted(
        reports, key=lambda r: (-r.longest_ccw, -r.coverage_percent, r.doc_id)
    )


def to_metadata(
    report: PlagiarismReport, db: CorpusDb, snippets: bool = True
) -> Dict[str, Any]:
    """Renders a report as the position-only result metadata document."""
    matches = []
    for record in report.matches:
        entry = db.registry[record.ref_doc_id]
        match: Dict[str, Any] = {
            "queryStart": record.query_start,
            "queryEnd": record.query_end,
            "refDocId": record.ref_doc_id,
            "refTitle": entry.title,
            "refUrl": entry.url,
            "refStart": record.ref_start,
            "refEnd": record.ref_end,
            "matchedWords": record.matched_words,
            "ccw": record.ccw,
            "mismatchGaps": list(record.mismatch_gaps),
            "matchedRuns": list(record.matched_runs),
        }
        if snippets:
            snippet = db.snippet(record.ref_doc_id, record.ref_start, record.ref_end)
            if snippet is not None:
                match["refSnippet"] = snippet
        matches.append(match)
    return {
        "queryId": report.doc_id,
        "queryWordCount": report.query_word_count,
        "longestCcw": report.longest_ccw,
        "coveragePercent": round(report.coverage_percent, 4),
        "matches": matches,
    }


def report_from_metadata(metadata: Dict[str, Any]) -> PlagiarismReport:
    """Rebuilds a report from a metadata document; titles are not kept."""
    records = [
        MatchRecord(
            int(m["queryStart"]),
            int(m["queryEnd"]),
            int(m["refDocId"]),
            int(m["refStart"]),
            int(m["refEnd"]),
            tuple(int(g) for g in m.get("mismatchGaps", [])),
            tuple(int(r) for r in m.get("matchedRuns", [])),
        )
        for m in metadata.get("matches", [])
    ]
    return PlagiarismReport(
        str(metadata.get("queryId", "")),
        int(metadata.get("queryWordCount", 0)),
        records,
        int(metadata.get("longestCcw", 0)),
        float(metadata.get("coveragePercent", 0.0)),
    )
