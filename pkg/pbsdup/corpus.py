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
"""Reference corpus database: an FM-index plus a document registry.

All documents are encoded and concatenated in input order behind a single
terminal '$'. The registry records where each document starts so that global
word positions can be resolved back to documents and cross-document hits can
be discarded.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
import functools
import logging
from pathlib import Path
import struct
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple
import zlib

from pbsdup import fmindex
from pbsdup.encoder import (
    DEFAULT_ALPHABET,
    Alphabet,
    PbsDocument,
    encode_document,
    tokenize,
)
from pbsdup.errors import (
    ChecksumError,
    EncodingError,
    IndexFormatError,
    ManifestError,
    PositionError,
    TruncatedIndexError,
    UsageError,
    ValidationError,
)
from pbsdup.fmindex import FmIndex


REGISTRY_MAGIC = b"PBRG"

_COUNT = struct.Struct("<I")
_STRING_LENGTH = struct.Struct("<I")
_POSITION = struct.Struct("<QQ")
_CRC = struct.Struct("<Q")


def logger() -> logging.Logger:
    """Returns the module logger."""
    return logging.getLogger(__name__)


@dataclass(frozen=True)
class DocRegistryEntry:
    title: str
    url: str
    word_offset: int
    word_count: int
    plaintext_path: Optional[str] = None

    @property
    def word_end(self) -> int:
        return self.word_offset + self.word_count


class SourceDocument(NamedTuple):
    """A reference document to ingest."""

    title: str
    url: str
    text: bytes
    plaintext_path: Optional[str] = None


class ManifestEntry(NamedTuple):
    path: Path
    title: str
    url: str


def load_manifest(path: Path) -> List[ManifestEntry]:
    """Reads a corpus manifest.

    The manifest is a TSV file with one document per line: path, title and url.
    Relative paths are resolved against the manifest's directory. Blank lines
    and lines starting with '#' are skipped.

    Raises:
        ManifestError: The manifest is unreadable, empty or malformed, or a
            listed file does not exist.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as ex:
        raise ManifestError(f"{path}: {ex}") from ex

    entries: List[ManifestEntry] = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3 or not fields[0]:
            raise ManifestError(
                f"{path}:{line_number}: expected path<TAB>title<TAB>url"
            )
        doc_path = Path(fields[0])
        if not doc_path.is_absolute():
            doc_path = path.parent / doc_path
        if not doc_path.is_file():
            raise ManifestError(f"{path}:{line_number}: no such file {doc_path}")
        entries.append(ManifestEntry(doc_path, fields[1], fields[2]))

    if not entries:
        raise ManifestError(f"{path}: manifest lists no documents")
    return entries


def read_manifest_documents(path: Path) -> List[SourceDocument]:
    documents = []
    for entry in load_manifest(path):
        try:
            data = entry.path.read_bytes()
        except OSError as ex:
            raise ManifestError(f"{entry.path}: {ex}") from ex
        documents.append(
            SourceDocument(entry.title, entry.url, data, str(entry.path.resolve()))
        )
    return documents


@functools.lru_cache(maxsize=64)
def _word_spans(plaintext_path: str) -> Tuple[bytes, Tuple[Tuple[int, int], ...]]:
    data = Path(plaintext_path).read_bytes()
    spans = tuple((t.byte_start, t.byte_end) for t in tokenize(data))
    return data, spans


class CorpusDb:
    """A searchable reference database. Immutable once constructed."""

    def __init__(
        self,
        index: FmIndex,
        registry: Sequence[DocRegistryEntry],
        text: Optional[str] = None,
    ) -> None:
        offset = 0
        for doc_id, entry in enumerate(registry):
            if entry.word_offset != offset or entry.word_count < 0:
                raise ValidationError(
                    f"registry entry {doc_id} ({entry.title!r}) starts at "
                    f"{entry.word_offset}, expected {offset}"
                )
            offset += entry.word_count
        if offset != index.n:
            raise ValidationError(
                f"registry covers {offset} words but the index holds {index.n}"
            )
        self.index = index
        self.registry = list(registry)
        self._offsets = [e.word_offset for e in self.registry]
        self._text = text

    @property
    def alphabet(self) -> Alphabet:
        return self.index.alphabet

    @property
    def total_words(self) -> int:
        return self.index.n

    @property
    def text(self) -> str:
        """The indexed PBS text, recovered from the index on first use."""
        if self._text is None:
            self._text = self.index.invert()
        return self._text

    def __len__(self) -> int:
        return len(self.registry)

    @classmethod
    def from_pbs(
        cls,
        docs: Sequence[PbsDocument],
        alphabet: Alphabet = DEFAULT_ALPHABET,
        occ_rate: int = fmindex.DEFAULT_OCC_RATE,
        sa_rate: int = fmindex.DEFAULT_SA_RATE,
    ) -> CorpusDb:
        """Builds a database from already encoded documents, titled by id."""
        registry = []
        offset = 0
        for doc in docs:
            registry.append(DocRegistryEntry(doc.id, "", offset, len(doc.pbs)))
            offset += len(doc.pbs)
        text = "".join(doc.pbs for doc in docs)
        return cls(fmindex.build(text, alphabet, occ_rate, sa_rate), registry, text)

    def resolve(self, global_pos: int) -> Tuple[int, int]:
        """Maps a global word position to (document id, local word position).

        Raises:
            PositionError: global_pos is outside the indexed text.
        """
        if not 0 <= global_pos < self.index.n:
            raise PositionError(
                f"position {global_pos} outside database of {self.index.n} words"
            )
        doc_id = bisect.bisect_right(self._offsets, global_pos) - 1
        return doc_id, global_pos - self._offsets[doc_id]

    def snippet(self, doc_id: int, start: int, end: int) -> Optional[str]:
        """Reference plaintext of local words [start, end) of a document.

        Returns None when the plaintext is not available on this host.
        """
        entry = self.registry[doc_id]
        if entry.plaintext_path is None or start >= end:
            return None
        try:
            data, spans = _word_spans(entry.plaintext_path)
        except (OSError, EncodingError) as ex:
            logger().warning("No snippet for document %d: %s", doc_id, ex)
            return None
        if end > len(spans):
            logger().warning(
                "Plaintext of document %d has %d words, registry says %d",
                doc_id,
                len(spans),
                entry.word_count,
            )
            return None
        return data[spans[start][0] : spans[end - 1][1]].decode("utf-8")

    def stats(self) -> Dict[str, Any]:
        return {
            "documentCount": len(self.registry),
            "totalWords": self.index.n,
            "alphabetSize": self.alphabet.size,
            "occRate": self.index.occ_rate,
            "saRate": self.index.sa_rate,
        }

    def verify(self) -> List[str]:
        """Re-derives the text from the index and checks it against the registry.

        Documents whose plaintext is available are re-encoded and compared
        with their stretch of the indexed text.

        Returns:
            A description of every problem found; empty when consistent.
        """
        problems = []
        text = self.index.invert()
        registered = sum(e.word_count for e in self.registry)
        if len(text) != registered:
            problems.append(f"index holds {len(text)} words, registry {registered}")
        for doc_id, entry in enumerate(self.registry):
            if entry.plaintext_path is None:
                continue
            path = Path(entry.plaintext_path)
            if not path.is_file():
                problems.append(f"{doc_id}: plaintext {path} is missing")
                continue
            try:
                doc = encode_document(path.read_bytes(), self.alphabet)
            except EncodingError as ex:
                problems.append(f"{doc_id}: {ex}")
                continue
            if doc.pbs != text[entry.word_offset : entry.word_end]:
                problems.append(f"{doc_id}: plaintext no longer matches the index")
        return problems

    def save(self, path: Path) -> None:
        path.write_bytes(self.to_bytes())
        logger().info("Wrote %d documents to %s", len(self.registry), path)

    def to_bytes(self) -> bytes:
        return fmindex.serialize(self.index) + encode_registry(self.registry)

    @classmethod
    def from_bytes(cls, buf: bytes) -> CorpusDb:
        index, offset = fmindex.read_index(buf)
        if offset == len(buf):
            raise IndexFormatError("database has no document registry section")
        registry, end = decode_registry(buf, offset)
        if end != len(buf):
            raise IndexFormatError(f"{len(buf) - end} unexpected trailing bytes")
        return cls(index, registry)

    @classmethod
    def load(cls, path: Path) -> CorpusDb:
        db = cls.from_bytes(path.read_bytes())
        logger().info(
            "Loaded %s: %d documents, %d words", path, len(db), db.total_words
        )
        return db


def _pack_string(value: str) -> bytes:
    data = value.encode("utf-8")
    return _STRING_LENGTH.pack(len(data)) + data


def encode_registry(registry: Sequence[DocRegistryEntry]) -> bytes:
    """Encodes the PBRG registry section."""
    parts = [REGISTRY_MAGIC, _COUNT.pack(len(registry))]
    for entry in registry:
        parts.append(_pack_string(entry.title))
        parts.append(_pack_string(entry.url))
        parts.append(_pack_string(entry.plaintext_path or ""))
        parts.append(_POSITION.pack(entry.word_offset, entry.word_count))
    body = b"".join(parts)
    return body + _CRC.pack(zlib.crc32(body))


class _Reader:
    def __init__(self, buf: bytes, offset: int) -> None:
        self.buf = buf
        self.offset = offset

    def take(self, size: int) -> bytes:
        end = self.offset + size
        if end > len(self.buf):
            raise TruncatedIndexError("file ends inside the document registry")
        data = self.buf[self.offset : end]
        self.offset = end
        return data

    def unpack(self, fmt: struct.Struct) -> Tuple[Any, ...]:
        return fmt.unpack(self.take(fmt.size))

    def string(self) -> str:
        (length,) = self.unpack(_STRING_LENGTH)
        try:
            return self.take(length).decode("utf-8")
        except UnicodeDecodeError as ex:
            raise IndexFormatError(f"bad registry string: {ex}") from ex


def decode_registry(buf: bytes, offset: int = 0) -> Tuple[List[DocRegistryEntry], int]:
    """Decodes the PBRG section at offset; returns it and the offset past it."""
    start = offset
    reader = _Reader(buf, offset)
    magic = reader.take(len(REGISTRY_MAGIC))
    if magic != REGISTRY_MAGIC:
        raise IndexFormatError(f"bad registry magic {magic!r}")
    (count,) = reader.unpack(_COUNT)
    registry = []
    for _ in range(count):
        title = reader.string()
        url = reader.string()
        plaintext_path = reader.string() or None
        word_offset, word_count = reader.unpack(_POSITION)
        registry.append(
            DocRegistryEntry(title, url, word_offset, word_count, plaintext_path)
        )
    body_end = reader.offset
    (stored_crc,) = reader.unpack(_CRC)
    actual_crc = zlib.crc32(buf[start:body_end])
    if stored_crc != actual_crc:
        raise ChecksumError("document registry checksum mismatch")
    return registry, reader.offset


def ingest(
    documents: Iterable[SourceDocument],
    alphabet: Alphabet = DEFAULT_ALPHABET,
    occ_rate: int = fmindex.DEFAULT_OCC_RATE,
    sa_rate: int = fmindex.DEFAULT_SA_RATE,
) -> CorpusDb:
    """Encodes documents and builds a database over them, in input order.

    Raises:
        UsageError: There are no documents.
        EncodingError: One or more documents are not valid UTF-8; every
            failing document is named.
    """
    registry: List[DocRegistryEntry] = []
    sequences: List[str] = []
    failures: List[str] = []
    offset = 0
    for number, source in enumerate(documents):
        try:
            doc = encode_document(source.text, alphabet, source.title)
        except EncodingError as ex:
            logger().error(
                "Cannot encode document %d (%s): %s", number, source.title, ex
            )
            failures.append(f"{number} ({source.title}): {ex}")
            continue
        registry.append(
            DocRegistryEntry(
                source.title, source.url, offset, len(doc.pbs), source.plaintext_path
            )
        )
        sequences.append(doc.pbs)
        offset += len(doc.pbs)

    if failures:
        raise EncodingError("cannot encode documents: " + "; ".join(failures))
    if not registry:
        raise UsageError("cannot build a database from an empty corpus")

    text = "".join(sequences)
    index = fmindex.build(text, alphabet, occ_rate, sa_rate)
    logger().info("Built database: %d documents, %d words", len(registry), offset)
    return CorpusDb(index, registry, text)
