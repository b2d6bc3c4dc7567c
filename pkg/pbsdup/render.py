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
"""Self-contained HTML reports joining result metadata with local plaintext.

Result metadata only carries word indices. The offset map written at encode
time turns them into byte ranges of the untouched source, so highlighting
needs neither the network nor any file besides the source and its map.
"""
from __future__ import annotations

from dataclasses import dataclass
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Tuple

from jinja2 import Environment, FileSystemLoader

from pbsdup import paths
from pbsdup.bundle import LocalBundle
from pbsdup.encoder import OffsetMap
from pbsdup.errors import MapMismatchError


TEMPLATE_NAME = "report.html.j2"


def logger() -> logging.Logger:
    """Returns the module logger."""
    return logging.getLogger(__name__)


class Highlight(NamedTuple):
    """A run or a gap of one match, in query words and source bytes."""

    match_index: int
    word_start: int
    word_end: int
    byte_start: int
    byte_end: int
    gap: bool


@dataclass(frozen=True)
class Segment:
    text: str
    matches: Tuple[int, ...] = ()
    gap: bool = False

    @property
    def highlighted(self) -> bool:
        return bool(self.matches)

    @property
    def data_m(self) -> str:
        return " ".join(str(m) for m in self.matches)


def _check_counts(metadata: Mapping[str, Any], offset_map: OffsetMap) -> None:
    word_count = metadata.get("queryWordCount")
    if word_count is not None and int(word_count) != len(offset_map):
        raise MapMismatchError(
            f"result covers {word_count} words but the map has {len(offset_map)}"
        )


def match_highlights(
    metadata: Mapping[str, Any], offset_map: OffsetMap
) -> List[Highlight]:
    """Splits every match into its matched runs and gaps and maps them to bytes.

    Raises:
        MapMismatchError: A match lies outside the map or its runs and gaps do
            not add up to its span.
    """
    _check_counts(metadata, offset_map)
    entries = offset_map.entries
    highlights: List[Highlight] = []
    for match_index, match in enumerate(metadata.get("matches", [])):
        start = int(match["queryStart"])
        end = int(match["queryEnd"])
        if not 0 <= start < end <= len(entries):
            raise MapMismatchError(
                f"match {match_index} covers words [{start}, {end}) but the map "
                f"has {len(entries)}"
            )
        runs = [int(r) for r in match.get("matchedRuns") or [end - start]]
        gaps = [int(g) for g in match.get("mismatchGaps", [])]
        if len(runs) != len(gaps) + 1 or sum(runs) + sum(gaps) != end - start:
            raise MapMismatchError(f"match {match_index}: runs and gaps do not add up")

        position = start
        for run_index, run in enumerate(runs):
            pieces = [(run, False)]
            if run_index < len(gaps):
                pieces.append((gaps[run_index], True))
            for length, gap in pieces:
                last = position + length - 1
                highlights.append(
                    Highlight(
                        match_index,
                        position,
                        position + length,
                        entries[position].byte_start,
                        entries[last].byte_end,
                        gap,
                    )
                )
                position += length
    return highlights


def segments(
    source: bytes, offset_map: OffsetMap, highlights: List[Highlight]
) -> List[Segment]:
    """Cuts the source into plain and highlighted stretches.

    Consecutive words covered by the same matches in the same style share one
    segment, including the delimiters between them.
    """
    covering: Dict[int, Dict[int, bool]] = {}
    for highlight in highlights:
        for word in range(highlight.word_start, highlight.word_end):
            covering.setdefault(word, {})[highlight.match_index] = highlight.gap

    def style(word: int) -> Tuple[Tuple[int, ...], bool]:
        matches = covering.get(word)
        if not matches:
            return (), False
        # A word is drawn as a gap only when every covering match has it as one.
        return tuple(sorted(matches)), all(matches.values())

    result: List[Segment] = []
    entries = offset_map.entries
    cursor = 0
    word = 0
    while word < len(entries):
        key = style(word)
        last = word
        while last + 1 < len(entries) and style(last + 1) == key:
            last += 1
        if key[0]:
            begin = entries[word].byte_start
            finish = entries[last].byte_end
            if begin > cursor:
                result.append(Segment(source[cursor:begin].decode("utf-8")))
            result.append(Segment(source[begin:finish].decode("utf-8"), *key))
            cursor = finish
        word = last + 1
    if cursor < len(source):
        result.append(Segment(source[cursor:].decode("utf-8")))
    return result


class ReportRenderer:
    """Renders reports from the jinja2 templates shipped with the package."""

    def __init__(self, template_dir: Optional[Path] = None) -> None:
        if template_dir is None:
            template_dir = paths.templates_dir()
        if not template_dir.is_dir():
            raise FileNotFoundError(f"Template directory not found: {template_dir}")
        self.env = Environment(
            loader=FileSystemLoader(str(template_dir)),
            autoescape=True,
            trim_blocks=True,
            lstrip_blocks=True,
        )
        self.env.filters["percent"] = lambda value: f"{float(value):.2f}%"

    def render(
        self,
        metadata: Mapping[str, Any],
        source: bytes,
        offset_map: OffsetMap,
        title: str,
    ) -> str:
        highlights = match_highlights(metadata, offset_map)
        template = self.env.get_template(TEMPLATE_NAME)
        return template.render(
            title=title,
            metadata=metadata,
            matches=metadata.get("matches", []),
            segments=segments(source, offset_map, highlights),
            stripped_lines=offset_map.stripped_lines,
        )


def render_report(
    bundle: LocalBundle,
    metadata: Mapping[str, Any],
    out_path: Optional[Path] = None,
    renderer: Optional[ReportRenderer] = None,
) -> Path:
    """Writes the HTML report for a bundle and returns its path.

    Raises:
        SourceChangedError: The source was edited after encoding.
        MapMismatchError: The metadata does not fit the local map.
    """
    source, offset_map = bundle.verified_source()
    if renderer is None:
        renderer = ReportRenderer()
    html = renderer.render(metadata, source, offset_map, bundle.doc_id)
    if out_path is None:
        out_path = bundle.report_path
    out_path.write_text(html, encoding="utf-8")
    logger().info(
        "Wrote %s (%d matches)", out_path, len(metadata.get("matches", []))
    )
    return out_path
