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
"""FM-index over a PBS text.

The index keeps the Burrows-Wheeler transform of the text plus a terminal '$',
the C table, occurrence counts checkpointed every occ_rate rows and the suffix
array sampled every sa_rate rows. Patterns are matched right to left
(backward search) and occurrences are resolved by LF-stepping to the nearest
sampled row. Both run over arrays of patterns and rows with numpy.

>>> index = build("ACAC")
>>> index.bwt.decode()
'CC$AA'
>>> index.count("AC")
2
"""
from __future__ import annotations

from dataclasses import dataclass
import logging
import struct
from typing import Any, List, Sequence, Tuple
import zlib

import numpy as np
import numpy.typing as npt

from pbsdup import sais
from pbsdup.encoder import DEFAULT_ALPHABET, Alphabet
from pbsdup.errors import (
    ChecksumError,
    IndexFormatError,
    TruncatedIndexError,
    ValidationError,
    VersionMismatchError,
)


MAGIC = b"PBFM"
FORMAT_VERSION = 1
SENTINEL = ord("$")

DEFAULT_OCC_RATE = 128
DEFAULT_SA_RATE = 32

# magic, version, alphabet size, occ rate, sa rate, n
_HEADER = struct.Struct("<4sIBIIQ")
_CRC = struct.Struct("<Q")

# Checkpoints and samples are stored as u32.
MAX_TEXT_LENGTH = 2**32 - 2

Rows = npt.NDArray[np.int64]


def logger() -> logging.Logger:
    """Returns the module logger."""
    return logging.getLogger(__name__)


@dataclass(frozen=True)
class SaRange:
    """Half-open range of suffix array rows."""

    lo: int
    hi: int

    def __len__(self) -> int:
        return self.hi - self.lo

    @property
    def empty(self) -> bool:
        return self.hi <= self.lo


class FmIndex:
    """A read-only FM-index. Use build() or deserialize() to create one.

    Besides the serialized tables the index keeps, for every symbol and row,
    the count of that symbol between the row's checkpoint and the row. Rank
    is then two table lookups, which lets searches run on whole arrays of
    rows at once.
    """

    def __init__(
        self,
        alphabet: Alphabet,
        bwt: bytes,
        c_table: npt.NDArray[np.uint64],
        occ: npt.NDArray[np.uint32],
        sa_samples: npt.NDArray[np.uint32],
        occ_rate: int,
        sa_rate: int,
    ) -> None:
        self.alphabet = alphabet
        self.bwt = bwt
        self.c_table = c_table
        self.occ = occ
        self.sa_samples = sa_samples
        self.occ_rate = occ_rate
        self.sa_rate = sa_rate
        self.n = len(bwt) - 1
        self.sigma = alphabet.size + 1

        # Plain ints keep the scalar LF walk fast.
        self._c = [int(v) for v in c_table]
        self._c_array = c_table.astype(np.int64)
        # '$' stays -1 here: it is never part of a match.
        self._pattern_codes = np.full(256, -1, dtype=np.int16)
        for code, char in enumerate(alphabet.chars, start=1):
            self._pattern_codes[ord(char)] = code
        symbol_codes = self._pattern_codes.copy()
        symbol_codes[SENTINEL] = 0
        self._bwt_codes = symbol_codes[np.frombuffer(bwt, dtype=np.uint8)].astype(
            np.uint8
        )
        self._inblock = self._inblock_counts()

    def __len__(self) -> int:
        return self.n

    def _inblock_counts(self) -> npt.NDArray[Any]:
        rows = self.n + 2
        block_starts = np.arange(rows, dtype=np.int64) // self.occ_rate * self.occ_rate
        table = np.zeros((self.sigma, rows), dtype=np.min_scalar_type(self.occ_rate))
        prefix = np.zeros(rows, dtype=np.int64)
        for code in range(self.sigma):
            np.cumsum(self._bwt_codes == code, dtype=np.int64, out=prefix[1:])
            table[code] = prefix - prefix[block_starts]
        return table

    def rank(self, code: int, i: int) -> int:
        """Occurrences of the symbol with the given code in bwt[0:i]."""
        return int(self.occ[i // self.occ_rate, code]) + int(self._inblock[code, i])

    def _rank_many(self, codes: Rows, rows: Rows) -> Rows:
        base = self.occ[rows // self.occ_rate, codes].astype(np.int64)
        return base + self._inblock[codes, rows]

    def lf(self, row: int) -> int:
        """Maps a row to the row of the suffix one position to the left."""
        code = int(self._bwt_codes[row])
        return self._c[code] + self.rank(code, row)

    def _lf_many(self, rows: Rows) -> Rows:
        codes = self._bwt_codes[rows].astype(np.int64)
        return self._c_array[codes] + self._rank_many(codes, rows)

    def search_many(self, patterns: Sequence[str]) -> Tuple[Rows, Rows]:
        """Backward search of all patterns side by side.

        Returns:
            Arrays lo and hi: rows [lo[i], hi[i]) hold the suffixes that start
            with patterns[i]. Each range equals backward_search(patterns[i]).
        """
        count = len(patterns)
        lengths = np.fromiter((len(p) for p in patterns), dtype=np.int64, count=count)
        joined = "".join(patterns).encode("ascii", errors="replace")
        codes = self._pattern_codes[np.frombuffer(joined, dtype=np.uint8)].astype(
            np.int64
        )
        ends = np.cumsum(lengths)
        lo = np.zeros(count, dtype=np.int64)
        hi = np.full(count, self.n + 1, dtype=np.int64)
        owners = np.repeat(np.arange(count, dtype=np.int64), lengths)
        hi[owners[codes < 0]] = 0

        for step in range(int(lengths.max(initial=0))):
            live = np.flatnonzero((lengths > step) & (lo < hi))
            if not live.size:
                break
            step_codes = codes[ends[live] - 1 - step]
            base = self._c_array[step_codes]
            lo[live] = base + self._rank_many(step_codes, lo[live])
            hi[live] = base + self._rank_many(step_codes, hi[live])
        np.maximum(hi, lo, out=hi)
        return lo, hi

    def backward_search(self, pattern: str) -> SaRange:
        """Finds the rows whose suffixes start with pattern.

        A character outside the index alphabet yields an empty range.
        """
        lo, hi = self.search_many([pattern])
        return SaRange(int(lo[0]), int(hi[0]))

    def count(self, pattern: str) -> int:
        return len(self.backward_search(pattern))

    def _locate_rows(self, rows: Rows) -> Rows:
        positions = np.empty(len(rows), dtype=np.int64)
        pending = np.arange(len(rows), dtype=np.int64)
        current = rows
        steps = 0
        while pending.size:
            sampled = current % self.sa_rate == 0
            positions[pending[sampled]] = (
                self.sa_samples[current[sampled] // self.sa_rate].astype(np.int64)
                + steps
            )
            pending, current = pending[~sampled], current[~sampled]
            at_start = self._bwt_codes[current] == 0
            positions[pending[at_start]] = steps
            pending, current = pending[~at_start], current[~at_start]
            current = self._lf_many(current)
            steps += 1
        return positions

    def locate_row(self, row: int) -> int:
        """Text position of the suffix at row."""
        return int(self._locate_rows(np.array([row], dtype=np.int64))[0])

    def locate_many(self, lo: Rows, hi: Rows) -> Tuple[Rows, Rows]:
        """Text positions of every row of the ranges [lo[i], hi[i]).

        Returns:
            Arrays positions and owners, where owners[j] is the range that
            positions[j] came from. Ranges come in order, positions ascending
            within each.
        """
        sizes = hi - lo
        owners = np.repeat(np.arange(len(lo), dtype=np.int64), sizes)
        firsts = np.cumsum(sizes) - sizes
        rows = np.repeat(lo - firsts, sizes) + np.arange(len(owners), dtype=np.int64)
        positions = self._locate_rows(rows)
        order = np.lexsort((positions, owners))
        return positions[order], owners[order]

    def locate(self, sa_range: SaRange) -> List[int]:
        """Text positions of every row in sa_range, sorted ascending."""
        positions, _ = self.locate_many(
            np.array([sa_range.lo], dtype=np.int64),
            np.array([max(sa_range.hi, sa_range.lo)], dtype=np.int64),
        )
        return positions.tolist()

    def find_many(self, patterns: Sequence[str]) -> List[List[int]]:
        """Sorted text positions of every pattern, in pattern order."""
        lo, hi = self.search_many(patterns)
        positions, _ = self.locate_many(lo, hi)
        flat = positions.tolist()
        found = []
        start = 0
        for end in np.cumsum(hi - lo).tolist():
            found.append(flat[start:end])
            start = end
        return found

    def find(self, pattern: str) -> List[int]:
        return self.find_many([pattern])[0]

    def invert(self) -> str:
        """Reconstructs the indexed text.

        Each sampled row knows its text position and walks LF leftwards until
        it reaches the next sampled row; all walks advance together.
        """
        text = np.zeros(self.n, dtype=np.uint8)
        bwt = np.frombuffer(self.bwt, dtype=np.uint8)
        rows = np.arange(0, self.n + 1, self.sa_rate, dtype=np.int64)
        starts = self.sa_samples.astype(np.int64)
        while rows.size:
            keep = starts > 0
            rows, starts = rows[keep], starts[keep]
            text[starts - 1] = bwt[rows]
            rows = self._lf_many(rows)
            starts = starts - 1
            keep = rows % self.sa_rate != 0
            rows, starts = rows[keep], starts[keep]
        return text.tobytes().decode("ascii")

    def to_bytes(self) -> bytes:
        return serialize(self)


def _suffix_array_with_sentinel(codes: List[int], upper: int) -> List[int]:
    if not codes:
        return [0]
    return [len(codes)] + sais.suffix_array(codes, upper)


def build(
    text: str,
    alphabet: Alphabet = DEFAULT_ALPHABET,
    occ_rate: int = DEFAULT_OCC_RATE,
    sa_rate: int = DEFAULT_SA_RATE,
) -> FmIndex:
    """Builds an FM-index over text.

    Raises:
        ValidationError: text contains a character outside the alphabet, or
            is too long for the on-disk format.
    """
    if occ_rate < 1 or sa_rate < 1:
        raise ValueError("sampling rates must be positive")
    alphabet.validate(text)
    n = len(text)
    if n > MAX_TEXT_LENGTH:
        raise ValidationError(f"text of {n} characters is too long to index")

    codes = {char: code for code, char in enumerate(alphabet.chars, start=1)}
    suffixes = _suffix_array_with_sentinel([codes[c] for c in text], alphabet.size)
    sa = np.array(suffixes, dtype=np.int64)

    # Appending '$' lets sa == 0 wrap around to it.
    extended = np.frombuffer(text.encode("ascii") + b"$", dtype=np.uint8)
    bwt_array = extended[sa - 1]

    byte_to_code = np.zeros(256, dtype=np.int64)
    for char, code in codes.items():
        byte_to_code[ord(char)] = code
    bwt_codes = byte_to_code[bwt_array]

    sigma = alphabet.size + 1
    counts = np.bincount(bwt_codes, minlength=sigma)
    c_table = np.zeros(sigma, dtype=np.uint64)
    c_table[1:] = np.cumsum(counts)[:-1]

    num_blocks = -(-(n + 1) // occ_rate)
    block_ids = np.arange(n + 1, dtype=np.int64) // occ_rate
    per_block = np.bincount(
        block_ids * sigma + bwt_codes, minlength=num_blocks * sigma
    ).reshape(num_blocks, sigma)
    occ = np.zeros((num_blocks + 1, sigma), dtype=np.uint32)
    occ[1:] = np.cumsum(per_block, axis=0)

    sa_samples = sa[::sa_rate].astype(np.uint32)
    logger().debug(
        "Indexed %d characters: %d checkpoints, %d suffix samples",
        n,
        len(occ),
        len(sa_samples),
    )
    return FmIndex(
        alphabet,
        bwt_array.tobytes(),
        c_table,
        occ,
        sa_samples,
        occ_rate,
        sa_rate,
    )


def serialize(index: FmIndex) -> bytes:
    """Encodes index in the PBFM file format."""
    parts = [
        _HEADER.pack(
            MAGIC,
            FORMAT_VERSION,
            index.alphabet.size,
            index.occ_rate,
            index.sa_rate,
            index.n,
        ),
        index.bwt,
        index.c_table.astype("<u8").tobytes(),
        index.occ.astype("<u4").tobytes(),
        index.sa_samples.astype("<u4").tobytes(),
    ]
    body = b"".join(parts)
    return body + _CRC.pack(zlib.crc32(body))


def _take(buf: bytes, offset: int, size: int, what: str) -> Tuple[bytes, int]:
    end = offset + size
    if end > len(buf):
        raise TruncatedIndexError(
            f"file ends inside the {what} ({len(buf) - offset} of {size} bytes)"
        )
    return buf[offset:end], end


def read_index(buf: bytes, offset: int = 0) -> Tuple[FmIndex, int]:
    """Decodes the PBFM section that starts at offset.

    Returns:
        The index and the offset just past its checksum.

    Raises:
        TruncatedIndexError: buf ends inside the section.
        VersionMismatchError: The section was written by another format version.
        ChecksumError: The stored CRC does not match.
        IndexFormatError: The section is otherwise malformed.
    """
    start = offset
    header, offset = _take(buf, offset, _HEADER.size, "header")
    magic, version, alphabet_size, occ_rate, sa_rate, n = _HEADER.unpack(header)
    if magic != MAGIC:
        raise IndexFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"format version {version} is not supported (expected {FORMAT_VERSION})"
        )
    if not 1 <= alphabet_size <= 26 or occ_rate < 1 or sa_rate < 1:
        raise IndexFormatError(
            f"bad header: alphabet={alphabet_size} occ_rate={occ_rate} "
            f"sa_rate={sa_rate}"
        )

    sigma = alphabet_size + 1
    num_checkpoints = -(-(n + 1) // occ_rate) + 1
    num_samples = -(-(n + 1) // sa_rate)
    bwt, offset = _take(buf, offset, n + 1, "BWT")
    c_bytes, offset = _take(buf, offset, 8 * sigma, "C table")
    occ_bytes, offset = _take(buf, offset, 4 * sigma * num_checkpoints, "Occ table")
    sa_bytes, offset = _take(buf, offset, 4 * num_samples, "suffix samples")
    crc_bytes, end = _take(buf, offset, _CRC.size, "checksum")

    (stored_crc,) = _CRC.unpack(crc_bytes)
    actual_crc = zlib.crc32(buf[start:offset])
    if stored_crc != actual_crc:
        raise ChecksumError(
            f"checksum mismatch: stored {stored_crc:#x}, computed {actual_crc:#x}"
        )

    alphabet = Alphabet.for_size(alphabet_size)
    allowed = set(alphabet.chars.encode("ascii")) | {SENTINEL}
    if bwt.count(SENTINEL) != 1 or not set(bwt) <= allowed:
        raise IndexFormatError("BWT is not over the declared alphabet")

    index = FmIndex(
        alphabet,
        bytes(bwt),
        np.frombuffer(c_bytes, dtype="<u8").astype(np.uint64),
        np.frombuffer(occ_bytes, dtype="<u4")
        .astype(np.uint32)
        .reshape(num_checkpoints, sigma),
        np.frombuffer(sa_bytes, dtype="<u4").astype(np.uint32),
        occ_rate,
        sa_rate,
    )
    return index, end


def deserialize(buf: bytes) -> FmIndex:
    """Decodes a buffer that holds exactly one PBFM section."""
    index, end = read_index(buf)
    if end != len(buf):
        raise IndexFormatError(f"{len(buf) - end} unexpected trailing bytes")
    return index
