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
"""Client-side bundles: a source file and the sidecars written next to it.

For notes.txt the client writes notes.fasta (the only file that is uploaded),
notes.map (word index to byte range, with the source hash) and later
notes.result.json and notes.report.html.
"""
from __future__ import annotations

from dataclasses import dataclass
import hashlib
import logging
from pathlib import Path
from typing import Any, NamedTuple, Optional, Tuple

from pbsdup import ref_filter
from pbsdup.encoder import (
    Alphabet,
    OffsetMap,
    PbsDocument,
    encode_document,
    format_map,
    parse_map,
    read_fasta,
    write_fasta,
)
from pbsdup.errors import (
    EncodingError,
    MapMismatchError,
    SourceChangedError,
    ValidationError,
)


FASTA_SUFFIX = ".fasta"
MAP_SUFFIX = ".map"
RESULT_SUFFIX = ".result.json"
REPORT_SUFFIX = ".report.html"


def logger() -> logging.Logger:
    """Returns the module logger."""
    return logging.getLogger(__name__)


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class LocalBundle:
    source_path: Path
    fasta_path: Path
    map_path: Path
    stripped_lines: Tuple[int, ...] = ()

    @classmethod
    def for_source(cls, source: Path) -> LocalBundle:
        """The bundle paths for a source, whether or not they exist yet."""
        return cls(
            source, source.with_suffix(FASTA_SUFFIX), source.with_suffix(MAP_SUFFIX)
        )

    @property
    def doc_id(self) -> str:
        return self.source_path.name

    @property
    def result_path(self) -> Path:
        return self.source_path.with_suffix(RESULT_SUFFIX)

    @property
    def report_path(self) -> Path:
        return self.source_path.with_suffix(REPORT_SUFFIX)

    def read_map(self) -> OffsetMap:
        return parse_map(self.map_path.read_text(encoding="utf-8"))

    def read_sequence(self) -> str:
        records = read_fasta(self.fasta_path.read_text(encoding="utf-8"))
        if len(records) != 1:
            raise ValidationError(f"{self.fasta_path}: expected one FASTA record")
        return records[0].sequence

    def verified_source(self) -> Tuple[bytes, OffsetMap]:
        """Reads the source and its map, checking the source is unchanged.

        Raises:
            SourceChangedError: The source hash differs from the one stored in
                the map at encode time.
            MapMismatchError: The map does not match the FASTA sequence length.
        """
        source = self.source_path.read_bytes()
        offset_map = self.read_map()
        if offset_map.source_sha256 != sha256_hex(source):
            raise SourceChangedError(
                f"{self.source_path} changed since it was encoded; encode it again"
            )
        if self.fasta_path.exists() and len(self.read_sequence()) != len(offset_map):
            raise MapMismatchError(
                f"{self.map_path} has {len(offset_map)} rows but "
                f"{self.fasta_path} does not have as many characters"
            )
        return source, offset_map


def encode_file(
    source: Path,
    alphabet: Alphabet,
    keep_refs: bool = False,
    model: Optional[ref_filter.RefModel] = None,
) -> LocalBundle:
    """Encodes one plaintext file and writes its FASTA and map sidecars.

    Unless keep_refs is set, lines the reference filter flags are left out of
    the sequence. The plaintext itself is never copied anywhere.

    Raises:
        EncodingError: The file is not valid UTF-8.
    """
    data = source.read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as ex:
        raise EncodingError(f"{source}: invalid UTF-8: {ex}") from ex

    stripped: Tuple[int, ...] = ()
    if not keep_refs:
        stripped = tuple(ref_filter.reference_lines(text, model))
        if stripped:
            logger().info(
                "%s: leaving out reference lines %s",
                source.name,
                ",".join(str(i) for i in stripped),
            )

    bundle = LocalBundle.for_source(source)
    doc = encode_document(text, alphabet, bundle.doc_id, stripped)
    write_bundle(bundle, doc, sha256_hex(data), alphabet, stripped)
    return LocalBundle(bundle.source_path, bundle.fasta_path, bundle.map_path, stripped)


def write_bundle(
    bundle: LocalBundle,
    doc: PbsDocument,
    source_sha256: str,
    alphabet: Alphabet,
    stripped: Tuple[int, ...],
) -> None:
    bundle.fasta_path.write_text(write_fasta(doc, doc.id), encoding="utf-8")
    bundle.map_path.write_text(
        format_map(doc.map, source_sha256, alphabet.size, stripped), encoding="utf-8"
    )
    logger().info("%s: %d words encoded", bundle.doc_id, len(doc))


class EncodeOutcome(NamedTuple):
    """What encoding one file produced: a bundle or the error that stopped it."""

    source: Path
    bundle: Optional[LocalBundle] = None
    error: Optional[Exception] = None


def encode_task(
    _worker: Any, source: Path, alphabet_size: int, keep_refs: bool
) -> EncodeOutcome:
    """Work queue entry point for encode_file.

    Unreadable and undecodable files come back as outcomes instead of raising.
    """
    try:
        encoded = encode_file(source, Alphabet.for_size(alphabet_size), keep_refs)
    except (OSError, EncodingError) as ex:
        logger().error("Cannot encode %s: %s", source, ex)
        return EncodeOutcome(source, error=ex)
    return EncodeOutcome(source, encoded)
