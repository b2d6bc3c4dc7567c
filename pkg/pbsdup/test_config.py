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
"""Tests for pbsdup.config."""
import json
from pathlib import Path
import tempfile
import unittest

from pbsdup.config import MiB, Settings


class SettingsTest(unittest.TestCase):
    def test_defaults(self) -> None:
        settings = Settings()
        self.assertEqual(12, settings.alphabet_size)
        self.assertEqual(8, settings.seed_k)
        self.assertEqual(12, settings.min_report)
        self.assertEqual(3, settings.max_gap)
        self.assertEqual(16 * MiB, settings.max_search_body)
        self.assertEqual(128 * MiB, settings.max_zip_body)

    def test_shipped_file_matches_defaults(self) -> None:
        shipped = Path(__file__).resolve().parent.parent / "pbsdup.json"
        self.assertEqual(Settings(), Settings.load(shipped, environ={}))

    def test_file_then_environment(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "pbsdup.json"
            path.write_text(json.dumps({"seed_k": 6, "port": 9000}))
            settings = Settings.load(
                path, environ={"PBSDUP_PORT": "9100", "PBSDUP_ASYNC_THRESHOLD": "0.5"}
            )
        self.assertEqual(6, settings.seed_k)
        self.assertEqual(9100, settings.port)
        self.assertEqual(0.5, settings.async_threshold)

    def test_unknown_keys_ignored(self) -> None:
        with self.assertLogs("pbsdup.config", "WARNING"):
            settings = Settings.from_mapping({"colour": "blue", "seed_k": 10})
        self.assertEqual(10, settings.seed_k)

    def test_not_an_object(self) -> None:
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "pbsdup.json"
            path.write_text("[1, 2]")
            with self.assertRaises(ValueError):
                Settings.load(path, environ={})

    def test_replace_skips_none(self) -> None:
        settings = Settings().replace(seed_k=None, min_report=14)
        self.assertEqual((8, 14), (settings.seed_k, settings.min_report))

    def test_rejects_bad_values(self) -> None:
        for changes in ({"alphabet_size": 27}, {"seed_k": 0}, {"max_gap": -1}):
            with self.subTest(**changes):
                with self.assertRaises(ValueError):
                    Settings.from_mapping(changes)
