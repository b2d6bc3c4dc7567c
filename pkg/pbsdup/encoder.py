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
"""Degenerate word encoding of plaintext into pseudo-biological sequences.

Every word of a document becomes one PBS character: the code points of the
word are summed and the remainder modulo the alphabet size picks the
character. The mapping is many-to-one, so the plaintext cannot be recovered
from the sequence. The word-to-byte-range map needed to resolve results back
to the plaintext is produced alongside and never leaves the client.

>>> encode_document("The cat sat").pbs
'CAG'
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
import enum
import re
from typing import Collection, Iterator, List, NamedTuple, Sequence, Tuple, Union

from pbsdup.errors import EncodingError, FastaFormatError, ValidationError


# Code points below this belong to western words; the rest are one-character
# eastern words.
EASTERN_THRESHOLD = 1000

DELIMITERS = frozenset(" \t\r\n+&")

FASTA_LINE_WIDTH = 80

# The first 16 entries are the documented order; sizes above 16 borrow the
# remaining capitals and re-sort.
ORDERED_CHARS = "ACDEGHIKLNQRSTVW"
EXTRA_CHARS = "BFJMOPUXYZ"

_TOKEN_RE = re.compile(
    # Western word: maximal run of code points < 1000 that are not delimiters.
    r"(?P<western>[^\t\n\r +&\u03e8-\U0010ffff]+)"
    # Eastern word: a single code point >= 1000 that is not whitespace.
    r"|(?P<eastern>[^\u0000-\u03e7\s])"
)


@enum.unique
class TokenKind(enum.Enum):
    WESTERN_WORD = "western-word"
    EASTERN_CHAR = "eastern-char"


@dataclass(frozen=True)
class Token:
    """A word of the source text and the half-open byte range it occupies."""

    word_index: int
    byte_start: int
    byte_end: int
    kind: TokenKind
    text: str


class MapEntry(NamedTuple):
    word_index: int
    byte_start: int
    byte_end: int


@dataclass(frozen=True)
class Alphabet:
    """The ordered set of PBS characters for an alphabet size."""

    size: int
    chars: str

    def __post_init__(self) -> None:
        if not 1 <= self.size <= 26:
            raise ValidationError(f"alphabet size must be in 1..26: {self.size}")
        if len(self.chars) != self.size or len(set(self.chars)) != self.size:
            raise ValidationError(f"bad alphabet characters: {self.chars!r}")
        if "".join(sorted(self.chars)) != self.chars:
            raise ValidationError(f"alphabet must be sorted: {self.chars!r}")

    @classmethod
    def for_size(cls, size: int) -> Alphabet:
        if not 1 <= size <= 26:
            raise ValidationError(f"alphabet size must be in 1..26: {size}")
        pool = ORDERED_CHARS + EXTRA_CHARS
        return cls(size, "".join(sorted(pool[:size])))

    def __contains__(self, char: object) -> bool:
        return isinstance(char, str) and len(char) == 1 and char in self.chars

    def validate(self, sequence: str) -> None:
        """Raises ValidationError naming the first character outside the alphabet."""
        illegal = set(sequence).difference(self.chars)
        if illegal:
            position = min(sequence.index(c) for c in illegal)
            raise ValidationError(
                f"illegal character {sequence[position]!r} at position {position} "
                f"for alphabet {self.chars}"
            )


DEFAULT_ALPHABET = Alphabet.for_size(12)


@dataclass(frozen=True)
class PbsDocument:
    """An encoded document and its client-side word map.

    Documents received by the service carry no map.
    """

    id: str
    pbs: str
    map: List[MapEntry] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.map and len(self.pbs) != len(self.map):
            raise ValidationError(
                f"{self.id}: sequence length {len(self.pbs)} != map length "
                f"{len(self.map)}"
            )

    def __len__(self) -> int:
        return len(self.pbs)


def _decode(text: Union[str, bytes]) -> str:
    if isinstance(text, bytes):
        try:
            return text.decode("utf-8")
        except UnicodeDecodeError as ex:
            raise EncodingError(f"invalid UTF-8: {ex}") from ex
    try:
        text.encode("utf-8")
    except UnicodeEncodeError as ex:
        raise EncodingError(f"text is not encodable as UTF-8: {ex}") from ex
    return text


def _iter_tokens(text: str) -> Iterator[Token]:
    byte_pos = 0
    char_pos = 0
    for index, match in enumerate(_TOKEN_RE.finditer(text)):
        start, end = match.span()
        byte_pos += len(text[char_pos:start].encode("utf-8"))
        word = match.group()
        byte_end = byte_pos + len(word.encode("utf-8"))
        kind = (
            TokenKind.WESTERN_WORD
            if match.lastgroup == "western"
            else TokenKind.EASTERN_CHAR
        )
        yield Token(index, byte_pos, byte_end, kind, word)
        byte_pos = byte_end
        char_pos = end


def tokenize(text: Union[str, bytes]) -> List[Token]:
    """Splits mixed-script text into words.

    Runs of code points below 1000 form one western word unless broken by a
    blank, tab, carriage return, line feed, '+' or '&'. Every other
    non-whitespace code point is a word on its own.

    >>> [t.text for t in tokenize("a+b")]
    ['a', 'b']
    """
    return list(_iter_tokens(_decode(text)))


def encode_word(word: str, alphabet: Alphabet = DEFAULT_ALPHABET) -> str:
    """Maps a word to the PBS character picked by its code-point sum.

    >>> encode_word("cat")
    'A'
    """
    if not word:
        raise ValueError("cannot encode an empty word")
    return alphabet.chars[sum(map(ord, word)) % alphabet.size]


def _line_starts(text: str) -> List[int]:
    """Byte offsets at which each LF-delimited line begins."""
    starts = [0]
    offset = 0
    for line in text.split("\n")[:-1]:
        offset += len(line.encode("utf-8")) + 1
        starts.append(offset)
    return starts


def encode_document(
    text: Union[str, bytes],
    alphabet: Alphabet = DEFAULT_ALPHABET,
    doc_id: str = "",
    excluded_lines: Collection[int] = (),
) -> PbsDocument:
    """Encodes a whole document.

    Args:
        text: The UTF-8 source.
        alphabet: PBS alphabet.
        doc_id: Identifier stored on the result.
        excluded_lines: 0-based LF-delimited lines whose words are dropped.
            Word indices are renumbered but byte offsets still point into the
            unmodified source.
    """
    decoded = _decode(text)
    tokens = _iter_tokens(decoded)
    if excluded_lines:
        excluded = frozenset(excluded_lines)
        starts = _line_starts(decoded)
        tokens = (
            t
            for t in tokens
            if bisect.bisect_right(starts, t.byte_start) - 1 not in excluded
        )

    chars: List[str] = []
    entries: List[MapEntry] = []
    for token in tokens:
        entries.append(MapEntry(len(entries), token.byte_start, token.byte_end))
        chars.append(encode_word(token.text, alphabet))
    return PbsDocument(doc_id, "".join(chars), entries)


def write_fasta(
    doc: PbsDocument, description: str, width: int = FASTA_LINE_WIDTH
) -> str:
    """Formats the document's sequence as FASTA.

    >>> write_fasta(PbsDocument("d1", "", []), "d1")
    '>d1\\n'
    """
    if "\n" in description or "\r" in description:
        raise ValueError("FASTA description must be a single line")
    lines = [">" + description]
    lines.extend(doc.pbs[i : i + width] for i in range(0, len(doc.pbs), width))
    return "\n".join(lines) + "\n"


class FastaRecord(NamedTuple):
    description: str
    sequence: str


def read_fasta(text: str) -> List[FastaRecord]:
    """Parses FASTA text into records.

    Raises:
        FastaFormatError: There is no header, sequence data precedes the first
            header, or a header has an empty description.
    """
    records: List[FastaRecord] = []
    description = None
    chunks: List[str] = []
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line:
            continue
        if line.startswith(">"):
            if description is not None:
                records.append(FastaRecord(description, "".join(chunks)))
            description = line[1:].strip()
            if not description:
                raise FastaFormatError(f"line {line_number}: empty description")
            chunks = []
        elif description is None:
            raise FastaFormatError(f"line {line_number}: sequence before header")
        else:
            chunks.append(line)
    if description is None:
        raise FastaFormatError("no FASTA header found")
    records.append(FastaRecord(description, "".join(chunks)))
    return records


@dataclass(frozen=True)
class OffsetMap:
    """The client-side sidecar that joins word indices back to source bytes."""

    entries: List[MapEntry]
    source_sha256: str = ""
    alphabet_size: int = DEFAULT_ALPHABET.size
    stripped_lines: Tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.entries)


def format_map(
    entries: Sequence[MapEntry],
    source_sha256: str,
    alphabet_size: int,
    stripped_lines: Collection[int] = (),
) -> str:
    """Formats the offset map sidecar: a header block then one TSV row per word."""
    lines = [
        f"# source-sha256={source_sha256}",
        f"# alphabet={alphabet_size}",
        "# stripped=" + ",".join(str(i) for i in sorted(stripped_lines)),
    ]
    lines.extend(f"{e.word_index}\t{e.byte_start}\t{e.byte_end}" for e in entries)
    return "\n".join(lines) + "\n"


def parse_map(text: str) -> OffsetMap:
    """Parses an offset map sidecar.

    Raises:
        ValidationError: A row is malformed or out of order.
    """
    headers: dict[str, str] = {}
    entries: List[MapEntry] = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            headers[key] = value
            continue
        fields = line.split("\t")
        try:
            word_index, byte_start, byte_end = (int(f) for f in fields)
        except ValueError as ex:
            raise ValidationError(f"map line {line_number}: {line!r}") from ex
        if word_index != len(entries) or not 0 <= byte_start < byte_end:
            raise ValidationError(f"map line {line_number}: bad entry {line!r}")
        if entries and byte_start < entries[-1].byte_end:
            raise ValidationError(f"map line {line_number}: overlapping entry")
        entries.append(MapEntry(word_index, byte_start, byte_end))

    try:
        alphabet_size = int(headers.get("alphabet", DEFAULT_ALPHABET.size))
        stripped = tuple(
            int(i) for i in headers.get("stripped", "").split(",") if i.strip()
        )
    except ValueError as ex:
        raise ValidationError(f"bad map header: {ex}") from ex
    return OffsetMap(
        entries, headers.get("source-sha256", ""), alphabet_size, stripped
    )
