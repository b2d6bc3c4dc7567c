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
"""Tests for pbsdup.ref_filter."""
import math
import random
import unittest

import numpy as np

from pbsdup import ref_filter
from pbsdup.errors import UsageError, ValidationError
from pbsdup.ref_filter import LabelledText
from pbsdup.synthetic import labelled_corpus


PROSE = (
    "the quick brown fox jumps over the lazy dog and then runs far away into the woods"
)
CITATION = (
    "Smith J. (2019) a study of word frequency and vocabulary growth in large "
    "text corpora of many kinds; Nature 12: 345-356"
)
# Weighted pattern sum of CITATION before dividing by its length.
CITATION_SUM = 15.78814 + 10.6957 + 9.418422 + 9.050281 - 0.35329 - 3 * 0.81583


def document(*blocks: tuple[str, int]) -> str:
    lines = []
    for line, count in blocks:
        lines.extend([line] * count)
    return "\n".join(lines) + "\n"


def column(name: str) -> int:
    names = [p.name for p in ref_filter.default_model().patterns]
    return names.index(name)


class ModelTest(unittest.TestCase):
    def test_default_model(self) -> None:
        model = ref_filter.default_model()
        self.assertEqual(19, len(model.patterns))
        self.assertEqual(-0.15, model.intercept)
        self.assertEqual(3, model.window)
        self.assertEqual(0.5, model.threshold)
        self.assertEqual("semicolon", model.patterns[0].name)
        self.assertAlmostEqual(15.78814, model.weights[0])
        self.assertAlmostEqual(-1.9572, model.weights[-1])

    def test_bracketed_index(self) -> None:
        pattern = ref_filter.default_model().patterns[-1]
        self.assertEqual("bracketed-index", pattern.name)
        for marker in ("[3]", "as shown in [3,4]", "[3-5]", "[12,14-16]."):
            self.assertIsNotNone(pattern.compiled.search(marker), marker)
        for text in ("[a]", "[]", "list[i]", "[3,]"):
            self.assertIsNone(pattern.compiled.search(text), text)

    def test_dump_and_parse(self) -> None:
        model = ref_filter.default_model()
        self.assertEqual(model, ref_filter.parse_model(ref_filter.dump_model(model)))

    def test_missing_intercept(self) -> None:
        text = ref_filter.dump_model(ref_filter.default_model())
        body = "\n".join(text.splitlines()[:-1])
        with self.assertRaises(ValidationError):
            ref_filter.parse_model(body)

    def test_wrong_pattern_count(self) -> None:
        with self.assertRaises(ValidationError):
            ref_filter.parse_model("semicolon\t;\t1.0\nINTERCEPT\t-\t0.0\n")

    def test_bad_regex(self) -> None:
        with self.assertRaisesRegex(ValidationError, ":1:"):
            ref_filter.parse_model("broken\t(\t1.0\nINTERCEPT\t-\t0.0\n")

    def test_bad_threshold(self) -> None:
        with self.assertRaises(ValidationError):
            ref_filter.default_model().with_threshold(1.0)


class DensityTest(unittest.TestCase):
    def test_short_citation(self) -> None:
        model = ref_filter.default_model()
        row = ref_filter.pattern_density("Smith J., et al. (2019);", model.patterns)
        expected = {
            "semicolon": 1,
            "initial-comma": 1,
            "year-in-parentheses": 1,
            "et-al": 1,
            "comma": 1,
            "capital-letter": 2,
        }
        for name, count in expected.items():
            self.assertAlmostEqual(count / 24, row[column(name)], msg=name)
        self.assertEqual(len(expected), int(np.count_nonzero(row)))

    def test_citation_score(self) -> None:
        model = ref_filter.default_model()
        row = ref_filter.pattern_density(CITATION, model.patterns)
        self.assertEqual(119, len(CITATION))
        self.assertAlmostEqual(CITATION_SUM / 119, float(row @ model.weights))

    def test_plain_prose(self) -> None:
        model = ref_filter.default_model()
        row = ref_filter.pattern_density(PROSE, model.patterns)
        self.assertFalse(row.any())

    def test_empty_line(self) -> None:
        model = ref_filter.default_model()
        self.assertFalse(ref_filter.pattern_density("", model.patterns).any())


class SmoothTest(unittest.TestCase):
    def test_truncated_edges(self) -> None:
        smoothed = ref_filter.smooth(np.array([[0.0], [1.0], [0.0], [0.0], [0.0]]))
        np.testing.assert_allclose([0.5, 1 / 3, 1 / 3, 0.0, 0.0], smoothed.ravel())

    def test_window_one(self) -> None:
        matrix = np.arange(6, dtype=np.float64).reshape(3, 2)
        np.testing.assert_array_equal(matrix, ref_filter.smooth(matrix, 1))

    def test_even_window(self) -> None:
        with self.assertRaises(ValueError):
            ref_filter.smooth(np.zeros((3, 2)), 2)

    def test_empty(self) -> None:
        self.assertEqual((0, 19), ref_filter.smooth(np.zeros((0, 19))).shape)


class ClassifyTest(unittest.TestCase):
    def test_single_feature(self) -> None:
        model = ref_filter.default_model().with_intercept(0.0)
        row = np.zeros(19)
        row[0] = 0.1
        self.assertAlmostEqual(
            1.0 / (1.0 + math.exp(-1.578814)), ref_filter.classify_line(row, model)
        )
        self.assertAlmostEqual(0.5, ref_filter.classify_line(np.zeros(19), model))

    def test_wrong_feature_count(self) -> None:
        with self.assertRaises(ValueError):
            ref_filter.classify_line(np.zeros(3), ref_filter.default_model())

    def test_monotonic_in_positive_pattern(self) -> None:
        model = ref_filter.default_model()
        previous = -1.0
        for density in (0.0, 0.01, 0.05, 0.1, 0.5):
            row = np.zeros(19)
            row[column("semicolon")] = density
            probability = ref_filter.classify_line(row, model)
            self.assertGreater(probability, previous)
            self.assertTrue(0.0 < probability < 1.0)
            previous = probability

    def test_trailing_bibliography(self) -> None:
        text = document((PROSE, 10), (CITATION, 10))
        self.assertEqual(list(range(10, 20)), ref_filter.reference_lines(text))
        probabilities = ref_filter.line_probabilities(text)
        score = CITATION_SUM / 119
        self.assertAlmostEqual(
            1.0 / (1.0 + math.exp(0.15 - score / 3)), probabilities[9]
        )
        self.assertLess(probabilities[9], 0.5)
        self.assertAlmostEqual(
            1.0 / (1.0 + math.exp(0.15 - 2 * score / 3)), probabilities[10]
        )
        self.assertAlmostEqual(1.0 / (1.0 + math.exp(0.15 - score)), probabilities[15])

    def test_prose_only(self) -> None:
        text = document((PROSE, 12))
        self.assertEqual([], ref_filter.reference_lines(text))
        self.assertEqual((text, []), ref_filter.strip_references(text))

    def test_strip_middle_block(self) -> None:
        text = document((PROSE, 5), (CITATION, 6), (PROSE, 5))
        body, flagged = ref_filter.strip_references(text)
        self.assertEqual(list(range(5, 11)), flagged)
        self.assertEqual(document((PROSE, 10)), body)

    def test_carriage_returns(self) -> None:
        text = document((PROSE, 10), (CITATION, 10)).replace("\n", "\r\n")
        self.assertEqual(list(range(10, 20)), ref_filter.reference_lines(text))

    def test_split_lines(self) -> None:
        self.assertEqual(["a", "b"], ref_filter.split_lines("a\r\nb\n"))
        self.assertEqual(["a", "", "b"], ref_filter.split_lines("a\n\nb"))
        self.assertEqual([""], ref_filter.split_lines(""))


class EvaluationTest(unittest.TestCase):
    def test_calibrate(self) -> None:
        text = document((PROSE, 10), (CITATION, 10))
        labels = [False] * 10 + [True] * 10
        model = ref_filter.default_model()
        intercept = ref_filter.calibrate_intercept(
            model, [LabelledText(text, labels)], [-5.0, -0.15, 5.0]
        )
        self.assertEqual(-0.15, intercept)

    def test_label_count_mismatch(self) -> None:
        with self.assertRaises(ValidationError):
            ref_filter.roc_auc(
                ref_filter.default_model(), [LabelledText("a\nb\n", [True])]
            )

    def test_single_class(self) -> None:
        with self.assertRaises(UsageError):
            ref_filter.roc_auc(
                ref_filter.default_model(),
                [LabelledText(document((PROSE, 3)), [False] * 3)],
            )

    def test_synthetic_corpus(self) -> None:
        corpus = labelled_corpus(random.Random(7), documents=20, vocab_size=500)
        documents = [LabelledText(d.text, d.labels) for d in corpus]
        model = ref_filter.default_model()
        self.assertGreater(ref_filter.roc_auc(model, documents), 0.9)
        intercept = ref_filter.calibrate_intercept(model, documents)
        self.assertTrue(-3.0 <= intercept <= 3.0)
