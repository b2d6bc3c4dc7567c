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
"""Tests for pbsdup.corpus."""
from pathlib import Path
import string
import tempfile
import unittest

from pbsdup import fmindex
from pbsdup.corpus import (
    CorpusDb,
    DocRegistryEntry,
    SourceDocument,
    encode_registry,
    ingest,
    load_manifest,
    read_manifest_documents,
)
from pbsdup.encoder import MapEntry, PbsDocument, encode_document, encode_word
from pbsdup.errors import (
    ChecksumError,
    EncodingError,
    IndexFormatError,
    ManifestError,
    PositionError,
    UsageError,
    ValidationError,
)


TEN_WORDS = b"one two three four five six seven eight nine ten"
FIVE_WORDS = b"a b c d e"


def text_for(pbs: str) -> str:
    """Single-letter words that encode to pbs."""
    letters = {}
    for letter in string.ascii_lowercase:
        letters.setdefault(encode_word(letter), letter)
    return " ".join(letters[c] for c in pbs)


def pbs_document(doc_id: str, pbs: str) -> PbsDocument:
    return PbsDocument(doc_id, pbs, [MapEntry(i, i, i + 1) for i in range(len(pbs))])


def write_corpus(root: Path) -> Path:
    (root / "docs").mkdir()
    (root / "docs" / "a.txt").write_bytes(TEN_WORDS)
    (root / "docs" / "b.txt").write_bytes(FIVE_WORDS)
    (root / "docs" / "c.txt").write_text("單個 pri-mRNA 可以含有", encoding="utf-8")
    manifest = root / "manifest.tsv"
    manifest.write_text(
        "# path\ttitle\turl\n"
        "docs/a.txt\tNumbers\thttps://example.org/a\n"
        "docs/b.txt\tLetters\thttps://example.org/b\n"
        "\n"
        "docs/c.txt\tMixed\t\n",
        encoding="utf-8",
    )
    return manifest


class IngestTest(unittest.TestCase):
    def test_offsets(self) -> None:
        db = ingest(
            [SourceDocument("a", "u", TEN_WORDS), SourceDocument("b", "v", FIVE_WORDS)]
        )
        self.assertEqual([0, 10], [e.word_offset for e in db.registry])
        self.assertEqual([10, 5], [e.word_count for e in db.registry])
        self.assertEqual(15, db.index.n)
        self.assertEqual("v", db.registry[1].url)

    def test_empty_document(self) -> None:
        db = ingest(
            [
                SourceDocument("a", "", TEN_WORDS),
                SourceDocument("empty", "", b""),
                SourceDocument("b", "", FIVE_WORDS),
            ]
        )
        self.assertEqual([0, 10, 10], [e.word_offset for e in db.registry])
        self.assertEqual(0, db.registry[1].word_count)
        self.assertEqual((2, 0), db.resolve(10))

    def test_walkthrough_reference(self) -> None:
        reference = "EDNGQDRGDQDRN"
        db = ingest([SourceDocument("fig", "", text_for(reference).encode())])
        self.assertEqual(reference, db.index.invert())
        self.assertEqual([1], db.index.find("DNGQDRGD"))
        self.assertEqual((0, 1), db.resolve(1))

    def test_empty_corpus(self) -> None:
        with self.assertRaises(UsageError):
            ingest([])

    def test_encoding_failure_names_document(self) -> None:
        with self.assertRaisesRegex(EncodingError, "broken"):
            ingest(
                [
                    SourceDocument("fine", "", TEN_WORDS),
                    SourceDocument("broken", "", b"\xff\xfe"),
                ]
            )


class ResolveTest(unittest.TestCase):
    def setUp(self) -> None:
        self.db = CorpusDb.from_pbs(
            [pbs_document("x", "A" * 10), pbs_document("y", "C" * 5)]
        )

    def test_resolve(self) -> None:
        self.assertEqual((0, 0), self.db.resolve(0))
        self.assertEqual((0, 9), self.db.resolve(9))
        self.assertEqual((1, 0), self.db.resolve(10))
        self.assertEqual((1, 4), self.db.resolve(14))

    def test_out_of_range(self) -> None:
        with self.assertRaises(PositionError):
            self.db.resolve(15)
        with self.assertRaises(PositionError):
            self.db.resolve(-1)
        with self.assertRaises(IndexError):
            self.db.resolve(100)

    def test_titles_from_ids(self) -> None:
        self.assertEqual(["x", "y"], [e.title for e in self.db.registry])

    def test_stats(self) -> None:
        stats = self.db.stats()
        self.assertEqual(2, stats["documentCount"])
        self.assertEqual(15, stats["totalWords"])
        self.assertEqual(12, stats["alphabetSize"])


class PersistenceTest(unittest.TestCase):
    def test_round_trip(self) -> None:
        db = ingest(
            [SourceDocument("a", "u", TEN_WORDS), SourceDocument("b", "v", FIVE_WORDS)]
        )
        with tempfile.TemporaryDirectory() as tmp_dir:
            path = Path(tmp_dir) / "corpus.pbdb"
            db.save(path)
            loaded = CorpusDb.load(path)
        self.assertEqual(db.registry, loaded.registry)
        self.assertEqual(db.index.bwt, loaded.index.bwt)
        for pos in range(db.total_words):
            self.assertEqual(db.resolve(pos), loaded.resolve(pos))

    def test_index_without_registry(self) -> None:
        index = fmindex.build("ACDE")
        with self.assertRaises(IndexFormatError):
            CorpusDb.from_bytes(fmindex.serialize(index))

    def test_overlapping_registry(self) -> None:
        index = fmindex.build("A" * 15)
        registry = [
            DocRegistryEntry("a", "", 0, 10),
            DocRegistryEntry("b", "", 5, 5),
        ]
        data = fmindex.serialize(index) + encode_registry(registry)
        with self.assertRaises(ValidationError):
            CorpusDb.from_bytes(data)

    def test_word_count_mismatch(self) -> None:
        index = fmindex.build("A" * 15)
        data = fmindex.serialize(index) + encode_registry(
            [DocRegistryEntry("a", "", 0, 10)]
        )
        with self.assertRaises(ValidationError):
            CorpusDb.from_bytes(data)

    def test_damaged_registry(self) -> None:
        db = CorpusDb.from_pbs([pbs_document("title", "ACDE")])
        data = bytearray(db.to_bytes())
        data[-12] ^= 0xFF
        with self.assertRaises(ChecksumError):
            CorpusDb.from_bytes(bytes(data))

    def test_trailing_bytes(self) -> None:
        db = CorpusDb.from_pbs([pbs_document("title", "ACDE")])
        with self.assertRaises(IndexFormatError):
            CorpusDb.from_bytes(db.to_bytes() + b"\0")


class ManifestTest(unittest.TestCase):
    def test_load(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            manifest = write_corpus(Path(tmp_dir))
            entries = load_manifest(manifest)
            titles = [e.title for e in entries]
            self.assertEqual(["Numbers", "Letters", "Mixed"], titles)
            self.assertEqual("", entries[2].url)
            self.assertTrue(all(e.path.is_file() for e in entries))

    def test_empty(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            manifest = Path(tmp_dir) / "manifest.tsv"
            manifest.write_text("# nothing here\n", encoding="utf-8")
            with self.assertRaises(ManifestError):
                load_manifest(manifest)

    def test_missing_manifest(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            with self.assertRaises(ManifestError):
                load_manifest(Path(tmp_dir) / "absent.tsv")

    def test_missing_document(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            manifest = Path(tmp_dir) / "manifest.tsv"
            manifest.write_text("gone.txt\tGone\t\n", encoding="utf-8")
            with self.assertRaisesRegex(ManifestError, "gone.txt"):
                load_manifest(manifest)

    def test_malformed_row(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            manifest = Path(tmp_dir) / "manifest.tsv"
            manifest.write_text("only-a-path\n", encoding="utf-8")
            with self.assertRaisesRegex(ManifestError, ":1:"):
                load_manifest(manifest)


class PlaintextTest(unittest.TestCase):
    def test_snippet(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            db = ingest(read_manifest_documents(write_corpus(Path(tmp_dir))))
            self.assertEqual("two three", db.snippet(0, 1, 3))
            self.assertEqual("c d e", db.snippet(1, 2, 5))
            self.assertEqual("個 pri-mRNA 可", db.snippet(2, 1, 4))
            self.assertIsNone(db.snippet(0, 3, 3))

    def test_snippet_without_plaintext(self) -> None:
        db = ingest([SourceDocument("a", "", TEN_WORDS)])
        self.assertIsNone(db.snippet(0, 0, 2))

    def test_verify(self) -> None:
        with tempfile.TemporaryDirectory() as tmp_dir:
            root = Path(tmp_dir)
            db = ingest(read_manifest_documents(write_corpus(root)))
            self.assertEqual([], db.verify())
            (root / "docs" / "b.txt").write_bytes(b"something else entirely now")
            problems = db.verify()
            self.assertEqual(1, len(problems))
            self.assertTrue(problems[0].startswith("1:"))

    def test_encoded_like_client(self) -> None:
        db = ingest([SourceDocument("a", "", TEN_WORDS)])
        self.assertEqual(encode_document(TEN_WORDS).pbs, db.index.invert())
