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
"""Tests for pbsdup.printers."""
import io
import unittest

from pbsdup.detector import MatchRecord, PlagiarismReport
from pbsdup.printers import FilePrinter, color_string, format_report


MATCH = MatchRecord(0, 12, 0, 0, 12, (), (12,))


class PrinterTest(unittest.TestCase):
    def test_ranked_plain(self) -> None:
        out = io.StringIO()
        FilePrinter(out, use_color=False).print_summary(
            [
                PlagiarismReport("clean", 50),
                PlagiarismReport("copied", 100, [MATCH], 12, 12.0),
            ]
        )
        lines = out.getvalue().splitlines()
        self.assertTrue(lines[0].endswith("copied"))
        self.assertTrue(lines[1].endswith("clean"))
        self.assertEqual("1/2 documents with duplicated passages", lines[-1])
        self.assertNotIn("\033", out.getvalue())

    def test_colors(self) -> None:
        copied = PlagiarismReport("copied", 100, [MATCH], 12, 12.0)
        self.assertEqual(
            color_string(format_report(copied, False), "red"),
            format_report(copied, True),
        )
        light = PlagiarismReport("light", 1200, [MATCH], 12, 1.0)
        self.assertTrue(format_report(light, True).startswith("\033[93m"))
        clean = PlagiarismReport("clean", 10)
        self.assertTrue(format_report(clean, True).startswith("\033[92m"))

    def test_empty(self) -> None:
        out = io.StringIO()
        FilePrinter(out, use_color=False).print_summary([])
        self.assertEqual("No documents were checked.\n", out.getvalue())

    def test_not_a_terminal(self) -> None:
        self.assertFalse(FilePrinter(io.StringIO()).use_color)
