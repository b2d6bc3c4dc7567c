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
"""Exception types shared across pbsdup."""


class PbsError(Exception):
    """Base class for all pbsdup errors."""


class EncodingError(PbsError):
    """Input text could not be decoded or tokenized."""


class ValidationError(PbsError):
    """A sequence or structure violates its invariants."""


class UsageError(PbsError):
    """An operation was called with arguments it cannot work with."""


class FastaFormatError(PbsError):
    """Text is not well-formed FASTA."""


class ManifestError(PbsError):
    """A corpus manifest is empty, malformed or points at missing files."""


class PositionError(PbsError, IndexError):
    """A word position lies outside the database."""


class IndexFormatError(PbsError):
    """A database file could not be parsed."""


class TruncatedIndexError(IndexFormatError):
    """A database file ended before all of its sections were read."""


class VersionMismatchError(IndexFormatError):
    """A database file was written by an incompatible format version."""


class ChecksumError(IndexFormatError):
    """A database file's stored checksum does not match its contents."""


class MapMismatchError(ValidationError):
    """Result metadata refers to words the local offset map does not have."""


class SourceChangedError(ValidationError):
    """A source file no longer matches the hash recorded when it was encoded."""


class NetworkError(PbsError):
    """The search service could not be reached."""


class ServerError(PbsError):
    """The search service answered with an error status."""

    def __init__(self, status: int, message: str) -> None:
        super().__init__(f"server returned {status}: {message}")
        self.status = status
