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
"""Measurements of the encoding and the index.

fp_rate counts how often distinct k-word strings share a PBS. Windows never
cross document boundaries and strings are compared exactly, without case
folding. compression_ratio, benchmark_search and reference_filter_auc measure
index size, search speed and the reference filter.
"""
from __future__ import annotations

from dataclasses import dataclass
import logging
from pathlib import Path
import random
import tempfile
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from pbsdup import fmindex, paths, ref_filter, synthetic
from pbsdup.config import MiB
from pbsdup.corpus import SourceDocument, ingest
from pbsdup.encoder import DEFAULT_ALPHABET, Alphabet, tokenize
from pbsdup.errors import UsageError, ValidationError
from pbsdup.timer import Timer
from pbsdup.workqueue import run_ordered


DEFAULT_KS = (8, 10, 12, 14, 16)
DEFAULT_AS = (8, 12, 14, 16)
DEFAULT_MEMORY_BUDGET = 512 * MiB
FP_COLUMNS = ("k", "a", "unique", "colliding", "fp_rate")

# Bytes held per window per word while counting: ids, codes and np.unique's
# sorted copy.
_BYTES_PER_WINDOW_WORD = 3 * 8

IntArray = npt.NDArray[np.int64]
Text = Union[str, bytes]


def logger() -> logging.Logger:
    """Returns the module logger."""
    return logging.getLogger(__name__)


@dataclass(frozen=True)
class FpReport:
    k: int
    a: int
    unique_strings: int
    colliding_strings: int

    @property
    def fp_rate(self) -> float:
        if not self.unique_strings:
            return 0.0
        return self.colliding_strings / self.unique_strings

    def to_row(self) -> List[str]:
        return [
            str(self.k),
            str(self.a),
            str(self.unique_strings),
            str(self.colliding_strings),
            f"{self.fp_rate:.6f}",
        ]


def format_fp_table(reports: Sequence[FpReport]) -> str:
    lines = ["\t".join(FP_COLUMNS)]
    lines.extend("\t".join(r.to_row()) for r in reports)
    return "\n".join(lines) + "\n"


def load_corpus(root: Path) -> List[bytes]:
    """Reads every text file under root, in path order."""
    return [path.read_bytes() for path in paths.text_files(root)]


def word_ids(texts: Sequence[Text]) -> Tuple[List[IntArray], List[str]]:
    """Tokenizes each text and numbers its distinct words.

    Returns:
        (one id array per text, the word of every id)
    """
    ids: Dict[str, int] = {}
    documents = []
    for text in texts:
        words = [token.text for token in tokenize(text)]
        documents.append(
            np.fromiter(
                (ids.setdefault(w, len(ids)) for w in words),
                dtype=np.int64,
                count=len(words),
            )
        )
    return documents, list(ids)


def word_codes(words: Sequence[str], a: int) -> IntArray:
    """The PBS code of every word: its code-point sum modulo a."""
    sums = np.fromiter((sum(map(ord, w)) for w in words), np.int64, len(words))
    return sums % a


def _windows(document: IntArray, k: int) -> IntArray:
    if len(document) < k:
        return np.empty((0, k), dtype=np.int64)
    return np.lib.stride_tricks.sliding_window_view(document, k)


def _count(windows: IntArray, codes: IntArray) -> Tuple[int, int]:
    """(unique strings, strings sharing their PBS) for one shard of windows."""
    if not len(windows):
        return 0, 0
    unique = np.unique(windows, axis=0)
    _, counts = np.unique(codes[unique], axis=0, return_counts=True)
    return len(unique), int(counts[counts >= 2].sum())


def _shard_of(pbs: IntArray, shards: int) -> npt.NDArray[np.uint64]:
    # Equal PBSs land in the same shard, so every bucket is counted whole.
    weights = np.array(
        [pow(1_000_003, i, 2**64) for i in range(pbs.shape[1])], dtype=np.uint64
    )
    hashes = (pbs.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
    return hashes % np.uint64(shards)


def _count_spilled(
    documents: Sequence[IntArray],
    codes: IntArray,
    k: int,
    shards: int,
    spill_dir: Optional[Path],
) -> Tuple[int, int]:
    unique = 0
    colliding = 0
    with tempfile.TemporaryDirectory(dir=spill_dir) as tmp:
        tmp_dir = Path(tmp)
        for number, document in enumerate(documents):
            windows = _windows(document, k)
            if not len(windows):
                continue
            shard_ids = _shard_of(codes[windows], shards)
            for shard in range(shards):
                part = windows[shard_ids == shard]
                if len(part):
                    np.save(tmp_dir / f"{shard:05d}-{number:08d}.npy", part)
        for shard in range(shards):
            parts = sorted(tmp_dir.glob(f"{shard:05d}-*.npy"))
            if not parts:
                continue
            windows = np.concatenate([np.load(part) for part in parts])
            shard_unique, shard_colliding = _count(windows, codes)
            unique += shard_unique
            colliding += shard_colliding
            logger().debug(
                "shard %d: %d windows, %d unique", shard, len(windows), shard_unique
            )
    return unique, colliding


def fp_rate(
    texts: Sequence[Text],
    k: int,
    a: int,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    shards: Optional[int] = None,
    spill_dir: Optional[Path] = None,
) -> FpReport:
    """Exact share of unique k-word strings whose PBS another string shares.

    When the windows would not fit in memory_budget they are partitioned by
    a hash of their PBS, written to temporary .npy files and counted one
    partition at a time. The result does not depend on the partitioning.

    Raises:
        UsageError: No document has k words, or k or a is not positive.
    """
    if k < 1 or a < 1:
        raise UsageError(f"k and a must be positive: k={k}, a={a}")
    documents, words = word_ids(texts)
    codes = word_codes(words, a)
    window_count = sum(max(len(d) - k + 1, 0) for d in documents)
    if not window_count:
        raise UsageError(f"corpus has no document of {k} words")

    if shards is None:
        estimate = window_count * k * _BYTES_PER_WINDOW_WORD
        shards = max(1, -(-estimate // memory_budget))
    if shards == 1:
        windows = np.concatenate([_windows(d, k) for d in documents])
        unique, colliding = _count(windows, codes)
    else:
        logger().info("Counting %d windows in %d shards", window_count, shards)
        unique, colliding = _count_spilled(documents, codes, k, shards, spill_dir)

    report = FpReport(k, a, unique, colliding)
    logger().info(
        "k=%d a=%d: %d unique, %d colliding (%.6f)",
        k,
        a,
        unique,
        colliding,
        report.fp_rate,
    )
    return report


def _fp_cell(
    _worker: Any, texts: Sequence[Text], k: int, a: int, memory_budget: int
) -> FpReport:
    return fp_rate(texts, k, a, memory_budget)


def sweep(
    texts: Sequence[Text],
    ks: Sequence[int] = DEFAULT_KS,
    alphabet_sizes: Sequence[int] = DEFAULT_AS,
    jobs: int = 1,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> List[FpReport]:
    """fp_rate for every (k, a) cell, ordered by k then a."""
    cells = [(texts, k, a, memory_budget) for k in ks for a in alphabet_sizes]
    return run_ordered(_fp_cell, cells, jobs)


@dataclass(frozen=True)
class CompressionReport:
    name: str
    raw_bytes: int
    pbs_chars: int
    db_bytes: Optional[int] = None

    @property
    def raw_per_pbs(self) -> float:
        return self.raw_bytes / self.pbs_chars if self.pbs_chars else 0.0

    @property
    def raw_per_db(self) -> Optional[float]:
        if not self.db_bytes:
            return None
        return self.raw_bytes / self.db_bytes

    @property
    def db_per_pbs(self) -> Optional[float]:
        if self.db_bytes is None or not self.pbs_chars:
            return None
        return self.db_bytes / self.pbs_chars


def compression_ratio(
    corpora: Mapping[str, Sequence[bytes]],
    alphabet: Alphabet = DEFAULT_ALPHABET,
    build_db: bool = True,
) -> List[CompressionReport]:
    """Raw size against PBS length and database size, per corpus and in total.

    The total's database size is the sum of the per-corpus databases.

    Raises:
        UsageError: There is no corpus.
        EncodingError: A text is not valid UTF-8.
    """
    if not corpora:
        raise UsageError("no corpus to measure")
    reports = []
    for name, texts in corpora.items():
        raw = sum(len(t) for t in texts)
        pbs = sum(len(tokenize(t)) for t in texts)
        db_bytes = None
        if build_db and pbs:
            db = ingest(
                (SourceDocument(str(i), "", t) for i, t in enumerate(texts)),
                alphabet,
            )
            db_bytes = len(db.to_bytes())
        reports.append(CompressionReport(name, raw, pbs, db_bytes))
    sizes = [r.db_bytes for r in reports]
    reports.append(
        CompressionReport(
            "total",
            sum(r.raw_bytes for r in reports),
            sum(r.pbs_chars for r in reports),
            None if None in sizes else sum(s for s in sizes if s is not None),
        )
    )
    return reports


def format_compression_table(reports: Sequence[CompressionReport]) -> str:
    lines = ["corpus\traw_bytes\tpbs_chars\tdb_bytes\traw_per_pbs\traw_per_db"]
    for r in reports:
        per_db = "" if r.raw_per_db is None else f"{r.raw_per_db:.3f}"
        db_bytes = "" if r.db_bytes is None else str(r.db_bytes)
        lines.append(
            f"{r.name}\t{r.raw_bytes}\t{r.pbs_chars}\t{db_bytes}\t"
            f"{r.raw_per_pbs:.3f}\t{per_db}"
        )
    return "\n".join(lines) + "\n"


def sample_corpus(language: str, size_bytes: int, seed: int = 0) -> bytes:
    """At least size_bytes of synthetic English-like or Chinese-like text.

    English words are drawn from a shuffled vocabulary so that word frequency
    does not follow word length.
    """
    rng = random.Random(seed)
    if language == "english":
        vocab = synthetic.vocabulary(rng)
        rng.shuffle(vocab)

        def chunk(size: int) -> str:
            return synthetic.english_text(rng, max(1, size // 6), vocab)

    elif language == "chinese":

        def chunk(size: int) -> str:
            return synthetic.chinese_text(rng, max(1, size // 3))

    else:
        raise UsageError(f"unknown language {language!r}")
    parts: List[bytes] = []
    total = 0
    while total < size_bytes or not parts:
        parts.append(chunk(size_bytes - total).encode("utf-8"))
        total += len(parts[-1])
    return b"".join(parts)


def naive_find(text: str, pattern: str) -> List[int]:
    """Every start of pattern in text, comparing at each position in turn."""
    return [
        i for i in range(len(text) - len(pattern) + 1) if text.startswith(pattern, i)
    ]


@dataclass(frozen=True)
class BenchReport:
    genome_length: int
    query_count: int
    query_length: int
    build_seconds: float
    index_seconds: float
    naive_queries: int
    naive_seconds: float

    @property
    def chars_per_second(self) -> float:
        chars = self.query_count * self.query_length
        return chars / self.index_seconds if self.index_seconds else float("inf")

    @property
    def speedup(self) -> float:
        """Naive time per query over index time per query."""
        if not self.naive_queries or not self.index_seconds:
            return float("inf")
        per_naive = self.naive_seconds / self.naive_queries
        return per_naive / (self.index_seconds / self.query_count)


def benchmark_search(
    genome_length: int = 1_000_000,
    query_count: int = 10_000,
    query_length: int = 12,
    naive_queries: int = 5,
    seed: int = 0,
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> BenchReport:
    """Times exact search of sampled queries in a random PBS genome.

    Queries are substrings of the genome, so each has at least one hit. The
    first naive_queries queries are also run through a naive scanner and
    their results compared with the index's.

    Raises:
        ValidationError: The index and the naive scanner disagree.
    """
    if genome_length < query_length or query_count < 1:
        raise UsageError("genome must be longer than a query and queries > 0")
    rng = random.Random(seed)
    genome = synthetic.random_pbs(rng, genome_length, alphabet)
    last_start = genome_length - query_length
    starts = [rng.randint(0, last_start) for _ in range(query_count)]
    queries = [genome[s : s + query_length] for s in starts]

    with Timer() as build_timer:
        index = fmindex.build(genome, alphabet)
    with Timer() as index_timer:
        found = index.find_many(queries)
    naive_queries = min(naive_queries, query_count)
    with Timer() as naive_timer:
        expected = [naive_find(genome, q) for q in queries[:naive_queries]]
    for query_number, positions in enumerate(expected):
        if sorted(found[query_number]) != positions:
            raise ValidationError(f"query {query_number}: index and scanner disagree")

    report = BenchReport(
        genome_length,
        query_count,
        query_length,
        build_timer.seconds,
        index_timer.seconds,
        naive_queries,
        naive_timer.seconds,
    )
    logger().info(
        "Built index in %s; %.0f query chars/s, %.1fx faster than scanning",
        build_timer,
        report.chars_per_second,
        report.speedup,
    )
    return report


@dataclass(frozen=True)
class RefFilterReport:
    documents: int
    lines: int
    intercept: float
    auc: float


def reference_filter_auc(
    model: Optional[ref_filter.RefModel] = None,
    documents: int = 60,
    seed: int = 7,
    calibrate: bool = False,
) -> RefFilterReport:
    """ROC AUC of the reference filter on the synthetic labelled corpus.

    With calibrate set, the intercept is first fitted on a second corpus
    drawn with another seed.
    """
    if model is None:
        model = ref_filter.default_model()
    if calibrate:
        training = _labelled(random.Random(seed + 1), documents)
        model = model.with_intercept(ref_filter.calibrate_intercept(model, training))
    corpus = _labelled(random.Random(seed), documents)
    auc = ref_filter.roc_auc(model, corpus)
    lines = sum(len(doc.labels) for doc in corpus)
    logger().info("Reference filter AUC %.4f over %d lines", auc, lines)
    return RefFilterReport(len(corpus), lines, model.intercept, auc)


def _labelled(rng: random.Random, documents: int) -> List[ref_filter.LabelledText]:
    return [
        ref_filter.LabelledText(doc.text, doc.labels)
        for doc in synthetic.labelled_corpus(rng, documents)
    ]
