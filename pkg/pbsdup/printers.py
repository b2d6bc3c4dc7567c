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
"""Terminal summaries of detection results."""
from __future__ import annotations

import os
import sys
from typing import Iterable, Optional, TextIO

from pbsdup.detector import PlagiarismReport, rank_reports


# Coverage at or above this is shown as a likely copy.
HIGH_COVERAGE_PERCENT = 10.0


def color_string(string: str, color: str) -> str:
    """Returns a string that will be colored when printed to a terminal."""
    colors = {
        "green": "\033[92m",
        "red": "\033[91m",
        "yellow": "\033[93m",
    }
    end_color = "\033[0m"
    return colors[color] + string + end_color


def maybe_color(text: str, color: str, do_color: bool) -> str:
    """Returns an (optionally) colored string."""
    return color_string(text, color) if do_color else text


def report_color(report: PlagiarismReport) -> str:
    if not report.matches:
        return "green"
    if report.coverage_percent >= HIGH_COVERAGE_PERCENT:
        return "red"
    return "yellow"


def format_report(report: PlagiarismReport, use_color: bool) -> str:
    """One line per document: CCW, coverage, match count and id.

    >>> format_report(PlagiarismReport("q", 100), use_color=False)
    'CCW     0  coverage   0.00%  matches   0  q'
    """
    text = (
        f"CCW {report.longest_ccw:5d}  coverage {report.coverage_percent:6.2f}%  "
        f"matches {len(report.matches):3d}  {report.doc_id}"
    )
    return maybe_color(text, report_color(report), use_color)


class FilePrinter:
    def __init__(self, to_file: TextIO, use_color: Optional[bool] = None) -> None:
        self.file = to_file
        if use_color is None:
            self.use_color = to_file.isatty() and os.name != "nt"
        else:
            self.use_color = use_color

    def print_summary(self, reports: Iterable[PlagiarismReport]) -> None:
        """Prints reports ranked by longest CCW, highest first."""
        ranked = rank_reports(reports)
        if not ranked:
            print(
                maybe_color("No documents were checked.", "red", self.use_color),
                file=self.file,
            )
            return
        flagged = sum(1 for r in ranked if r.matches)
        for report in ranked:
            print(format_report(report, self.use_color), file=self.file)
        print(file=self.file)
        label = maybe_color(
            f"{flagged}/{len(ranked)}", "red" if flagged else "green", self.use_color
        )
        print(f"{label} documents with duplicated passages", file=self.file)


class StdoutPrinter(FilePrinter):
    def __init__(self, use_color: Optional[bool] = None) -> None:
        super().__init__(sys.stdout, use_color)
