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
"""Tests for pbsdup.eval."""
import collections
import functools
import os
from pathlib import Path
import random
import tempfile
from typing import DefaultDict, List, Sequence, Set, Tuple
import unittest

from pbsdup import eval as pbs_eval
from pbsdup.config import MiB
from pbsdup.encoder import Alphabet, encode_word, tokenize
from pbsdup.errors import UsageError
from pbsdup.eval import FpReport
from pbsdup.synthetic import english_text, vocabulary


SLOW_TESTS = os.environ.get("PBSDUP_SLOW_TESTS") == "1"


def brute_force(texts: Sequence[str], k: int, a: int) -> FpReport:
    """Buckets every window's word tuple under its PBS in a plain dict."""
    alphabet = Alphabet.for_size(a)
    buckets: DefaultDict[str, Set[Tuple[str, ...]]] = collections.defaultdict(set)
    for text in texts:
        words = [token.text for token in tokenize(text)]
        letters = {word: encode_word(word, alphabet) for word in set(words)}
        for i in range(len(words) - k + 1):
            window = tuple(words[i : i + k])
            pbs = "".join(letters[w] for w in window)
            buckets[pbs].add(window)
    unique = sum(len(strings) for strings in buckets.values())
    colliding = sum(len(strings) for strings in buckets.values() if len(strings) > 1)
    return FpReport(k, a, unique, colliding)


def small_corpus(seed: int = 5, documents: int = 3, words: int = 1500) -> List[str]:
    rng = random.Random(seed)
    vocab = vocabulary(rng, 300)
    rng.shuffle(vocab)
    return [english_text(rng, words, vocab) for _ in range(documents)]


@functools.lru_cache(maxsize=None)
def large_corpus() -> Tuple[str, ...]:
    """About 10^5 words, shared by the full-grid tests."""
    return tuple(small_corpus(seed=17, documents=4, words=26_000))


class FpRateTest(unittest.TestCase):
    def test_ratio(self) -> None:
        report = FpReport(12, 12, 9_266_370_827, 70_352_323)
        self.assertAlmostEqual(0.0076, report.fp_rate, places=4)

    def test_single_string(self) -> None:
        self.assertEqual(
            FpReport(3, 12, 1, 0), pbs_eval.fp_rate(["the quick brown"], 3, 12)
        )

    def test_engineered_collision(self) -> None:
        self.assertEqual(encode_word("cat"), encode_word("tac"))
        report = pbs_eval.fp_rate(["cat x", "tac x"], 2, 12)
        self.assertEqual(FpReport(2, 12, 2, 2), report)
        self.assertEqual(1.0, report.fp_rate)

    def test_windows_stay_inside_documents(self) -> None:
        # Joined, "x tac" would be a third string.
        self.assertEqual(2, pbs_eval.fp_rate(["cat x", "tac x"], 2, 12).unique_strings)
        self.assertEqual(3, pbs_eval.fp_rate(["cat x tac x"], 2, 12).unique_strings)

    def test_repeated_strings_count_once(self) -> None:
        report = pbs_eval.fp_rate(["a b a b a b"], 2, 12)
        self.assertEqual(2, report.unique_strings)

    def test_case_sensitive(self) -> None:
        self.assertEqual(2, pbs_eval.fp_rate(["Cat", "cat"], 1, 26).unique_strings)

    def test_single_character_alphabet(self) -> None:
        self.assertEqual(1.0, pbs_eval.fp_rate(small_corpus(), 8, 1).fp_rate)

    def test_corpus_too_short(self) -> None:
        with self.assertRaises(UsageError):
            pbs_eval.fp_rate(["one two three"], 4, 12)
        with self.assertRaises(UsageError):
            pbs_eval.fp_rate(["one two three"], 0, 12)

    def test_matches_brute_force(self) -> None:
        texts = small_corpus()
        for k in (1, 2, 3, 4, 8):
            for a in (2, 4, 8, 12):
                with self.subTest(k=k, a=a):
                    self.assertEqual(
                        brute_force(texts, k, a), pbs_eval.fp_rate(texts, k, a)
                    )

    def test_sharding_is_exact(self) -> None:
        texts = small_corpus()
        expected = pbs_eval.fp_rate(texts, 3, 8)
        with tempfile.TemporaryDirectory() as tmp:
            for shards in (2, 7):
                self.assertEqual(
                    expected,
                    pbs_eval.fp_rate(texts, 3, 8, shards=shards, spill_dir=Path(tmp)),
                )
            self.assertEqual([], list(Path(tmp).iterdir()))
        self.assertEqual(expected, pbs_eval.fp_rate(texts, 3, 8, memory_budget=4096))

    def test_deterministic(self) -> None:
        texts = small_corpus()
        self.assertEqual(pbs_eval.fp_rate(texts, 4, 4), pbs_eval.fp_rate(texts, 4, 4))

    def test_full_grid_matches_brute_force(self) -> None:
        texts = large_corpus()
        self.assertGreaterEqual(sum(len(tokenize(t)) for t in texts), 100_000)
        reports = pbs_eval.sweep(texts, pbs_eval.DEFAULT_KS, pbs_eval.DEFAULT_AS)
        self.assertEqual(20, len(reports))
        for report in reports:
            with self.subTest(k=report.k, a=report.a):
                self.assertEqual(brute_force(texts, report.k, report.a), report)


class SweepTest(unittest.TestCase):
    def test_grid(self) -> None:
        texts = small_corpus()
        reports = pbs_eval.sweep(texts, ks=(2, 3, 4, 6, 8), alphabet_sizes=(4, 8))
        self.assertEqual(
            [(k, a) for k in (2, 3, 4, 6, 8) for a in (4, 8)],
            [(r.k, r.a) for r in reports],
        )
        for report in reports:
            self.assertEqual(brute_force(texts, report.k, report.a), report)

    def test_non_increasing_in_k(self) -> None:
        texts = small_corpus(seed=11, words=4000)
        ks = (3, 4, 5, 6, 8, 10)
        for a in (4, 8, 12):
            rates = [r.fp_rate for r in pbs_eval.sweep(texts, ks, (a,))]
            with self.subTest(a=a):
                self.assertEqual(sorted(rates, reverse=True), rates)

    def test_coarser_alphabet_collides_more(self) -> None:
        texts = large_corpus()
        for k in (10, 12, 14, 16):
            with self.subTest(k=k):
                self.assertGreaterEqual(
                    pbs_eval.fp_rate(texts, k, 8).fp_rate,
                    pbs_eval.fp_rate(texts, k, 16).fp_rate,
                )

    def test_parallel(self) -> None:
        texts = small_corpus(documents=2, words=500)
        serial = pbs_eval.sweep(texts, (2, 3), (4, 8))
        self.assertEqual(serial, pbs_eval.sweep(texts, (2, 3), (4, 8), jobs=2))

    def test_table(self) -> None:
        table = pbs_eval.format_fp_table([FpReport(8, 12, 4, 2)])
        self.assertEqual(
            "k\ta\tunique\tcolliding\tfp_rate\n8\t12\t4\t2\t0.500000\n", table
        )


class CompressionTest(unittest.TestCase):
    def test_single_word(self) -> None:
        reports = pbs_eval.compression_ratio({"cat": [b"cat"]})
        self.assertEqual(["cat", "total"], [r.name for r in reports])
        self.assertEqual((3, 1), (reports[0].raw_bytes, reports[0].pbs_chars))
        self.assertEqual(3.0, reports[0].raw_per_pbs)
        self.assertIsNotNone(reports[0].db_bytes)

    def test_english(self) -> None:
        sample = pbs_eval.sample_corpus("english", 1024 * 1024)
        self.assertGreaterEqual(len(sample), 1000 * 1000)
        (report, _) = pbs_eval.compression_ratio({"en": [sample]}, build_db=False)
        self.assertTrue(4.0 <= report.raw_per_pbs <= 8.0, report.raw_per_pbs)
        self.assertIsNone(report.db_bytes)

    def test_chinese(self) -> None:
        sample = pbs_eval.sample_corpus("chinese", 1024 * 1024)
        (report, _) = pbs_eval.compression_ratio({"zh": [sample]}, build_db=False)
        self.assertTrue(1.5 <= report.raw_per_pbs <= 3.0, report.raw_per_pbs)

    def test_database_overhead(self) -> None:
        sample = pbs_eval.sample_corpus("english", 60_000, seed=3)
        (report, total) = pbs_eval.compression_ratio({"en": [sample]})
        assert report.db_per_pbs is not None
        self.assertLessEqual(report.db_per_pbs, 1.8)
        self.assertEqual(report.db_bytes, total.db_bytes)

    @unittest.skipUnless(SLOW_TESTS, "set PBSDUP_SLOW_TESTS=1")
    def test_database_overhead_ten_megabytes(self) -> None:
        sample = pbs_eval.sample_corpus("english", 10 * MiB, seed=3)
        self.assertGreaterEqual(len(sample), 10 * MiB)
        (report, _) = pbs_eval.compression_ratio({"en": [sample]})
        assert report.db_per_pbs is not None
        self.assertLessEqual(report.db_per_pbs, 1.8)

    def test_total(self) -> None:
        reports = pbs_eval.compression_ratio({"a": [b"one two"], "b": [b"three"]})
        total = reports[2]
        self.assertEqual((12, 3), (total.raw_bytes, total.pbs_chars))

    def test_no_corpus(self) -> None:
        with self.assertRaises(UsageError):
            pbs_eval.compression_ratio({})

    def test_table(self) -> None:
        table = pbs_eval.format_compression_table(
            pbs_eval.compression_ratio({"cat": [b"cat"]}, build_db=False)
        )
        self.assertIn("cat\t3\t1\t\t3.000\t", table)


class BenchmarkTest(unittest.TestCase):
    def test_small_genome(self) -> None:
        report = pbs_eval.benchmark_search(
            genome_length=20_000, query_count=200, naive_queries=3, seed=1
        )
        self.assertEqual(200, report.query_count)
        self.assertGreater(report.chars_per_second, 0.0)
        self.assertGreater(report.speedup, 1.0)

    def test_index_beats_scanning(self) -> None:
        report = pbs_eval.benchmark_search(
            genome_length=100_000, query_count=2000, naive_queries=3, seed=4
        )
        self.assertGreaterEqual(report.speedup, 100.0)

    @unittest.skipUnless(SLOW_TESTS, "set PBSDUP_SLOW_TESTS=1")
    def test_ten_million_characters(self) -> None:
        report = pbs_eval.benchmark_search(
            genome_length=10_000_000, query_count=20_000, naive_queries=2, seed=2
        )
        self.assertGreaterEqual(report.chars_per_second, 1_000_000)
        self.assertGreaterEqual(report.speedup, 100.0)

    def test_naive_find(self) -> None:
        self.assertEqual([0, 2], pbs_eval.naive_find("ACACA", "ACA"))

    def test_bad_arguments(self) -> None:
        with self.assertRaises(UsageError):
            pbs_eval.benchmark_search(genome_length=5, query_length=12)


class ReferenceFilterTest(unittest.TestCase):
    def test_auc(self) -> None:
        report = pbs_eval.reference_filter_auc(documents=20)
        self.assertEqual(20, report.documents)
        self.assertGreater(report.auc, 0.9)

    def test_calibrated(self) -> None:
        report = pbs_eval.reference_filter_auc(documents=20, calibrate=True)
        self.assertTrue(-3.0 <= report.intercept <= 3.0)
        self.assertGreater(report.auc, 0.9)


class CorpusTest(unittest.TestCase):
    def test_load_corpus(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            (root / "b.txt").write_bytes(b"two")
            (root / "a.txt").write_bytes(b"one")
            (root / "skip.bin").write_bytes(b"\x00")
            self.assertEqual([b"one", b"two"], pbs_eval.load_corpus(root))

    def test_unknown_language(self) -> None:
        with self.assertRaises(UsageError):
            pbs_eval.sample_corpus("klingon", 10)
