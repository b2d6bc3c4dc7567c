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
"""Logistic classifier that marks bibliography lines.

Each line is described by the density of 19 citation-related patterns
(matches per character). Densities are smoothed over neighbouring lines and
fed to a logistic model; lines scoring at or above the threshold are treated
as references and kept out of the encoded document.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
import functools
import logging
import math
from pathlib import Path
import re
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from sklearn.metrics import roc_auc_score  # type: ignore

from pbsdup.errors import UsageError, ValidationError


DEFAULT_MODEL_PATH = Path(__file__).resolve().parent / "data" / "refmodel.tsv"
PATTERN_COUNT = 19
DEFAULT_WINDOW = 3
DEFAULT_THRESHOLD = 0.5
INTERCEPT_NAME = "INTERCEPT"

FloatArray = npt.NDArray[np.float64]


def logger() -> logging.Logger:
    """Returns the module logger."""
    return logging.getLogger(__name__)


@dataclass(frozen=True)
class Pattern:
    name: str
    regex: str
    weight: float

    @functools.cached_property
    def compiled(self) -> re.Pattern[str]:
        return re.compile(self.regex)


@dataclass(frozen=True)
class RefModel:
    patterns: Tuple[Pattern, ...]
    intercept: float
    window: int = DEFAULT_WINDOW
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self) -> None:
        if len(self.patterns) != PATTERN_COUNT:
            raise ValidationError(
                f"model needs {PATTERN_COUNT} patterns, got {len(self.patterns)}"
            )
        if self.window < 1 or self.window % 2 == 0:
            raise ValidationError(f"window must be odd and positive: {self.window}")
        if not 0.0 < self.threshold < 1.0:
            raise ValidationError(f"threshold must be in (0, 1): {self.threshold}")

    @property
    def weights(self) -> FloatArray:
        return np.array([p.weight for p in self.patterns], dtype=np.float64)

    def with_intercept(self, intercept: float) -> RefModel:
        return replace(self, intercept=intercept)

    def with_threshold(self, threshold: float) -> RefModel:
        return replace(self, threshold=threshold)


class LabelledText(NamedTuple):
    """A document with one reference label per line, as split by split_lines."""

    text: str
    labels: List[bool]


def parse_model(text: str, source: str = "<model>") -> RefModel:
    """Parses the name<TAB>regex<TAB>weight model format.

    Raises:
        ValidationError: A record is malformed, a regex does not compile, or
            the intercept record is missing.
    """
    patterns: List[Pattern] = []
    intercept: Optional[float] = None
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ValidationError(f"{source}:{line_number}: expected 3 fields")
        name, regex, weight_str = fields
        try:
            weight = float(weight_str)
        except ValueError as ex:
            raise ValidationError(f"{source}:{line_number}: bad weight") from ex
        if name == INTERCEPT_NAME:
            intercept = weight
            continue
        try:
            re.compile(regex)
        except re.error as ex:
            raise ValidationError(f"{source}:{line_number}: bad regex: {ex}") from ex
        patterns.append(Pattern(name, regex, weight))
    if intercept is None:
        raise ValidationError(f"{source}: no {INTERCEPT_NAME} record")
    return RefModel(tuple(patterns), intercept)


def load_model(path: Path = DEFAULT_MODEL_PATH) -> RefModel:
    return parse_model(path.read_text(encoding="utf-8"), str(path))


@functools.lru_cache(maxsize=1)
def default_model() -> RefModel:
    return load_model()


def dump_model(model: RefModel) -> str:
    lines = [f"{p.name}\t{p.regex}\t{p.weight!r}" for p in model.patterns]
    lines.append(f"{INTERCEPT_NAME}\t-\t{model.intercept!r}")
    return "\n".join(lines) + "\n"


def split_lines(text: str) -> List[str]:
    """Splits on LF and strips CR. A final LF does not start a new line."""
    lines = text.split("\n")
    if text.endswith("\n"):
        lines.pop()
    return [line.replace("\r", "") for line in lines]


def pattern_density(line: str, patterns: Sequence[Pattern]) -> FloatArray:
    """Non-overlapping match count of every pattern divided by line length."""
    row = np.zeros(len(patterns), dtype=np.float64)
    if not line:
        return row
    for column, pattern in enumerate(patterns):
        row[column] = len(pattern.compiled.findall(line))
    return row / len(line)


def density_matrix(lines: Sequence[str], model: RefModel) -> FloatArray:
    matrix = np.zeros((len(lines), len(model.patterns)), dtype=np.float64)
    for row, line in enumerate(lines):
        matrix[row] = pattern_density(line, model.patterns)
    return matrix


def smooth(matrix: FloatArray, window: int = DEFAULT_WINDOW) -> FloatArray:
    """Centered moving average over rows, truncated at the edges.

    >>> smooth(np.array([[0.0], [1.0], [0.0], [0.0], [0.0]])).ravel().round(3)
    array([0.5  , 0.333, 0.333, 0.   , 0.   ])
    """
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and positive: {window}")
    rows = matrix.shape[0]
    if rows == 0:
        return matrix.copy()
    half = window // 2
    sums = np.zeros((rows + 1,) + matrix.shape[1:], dtype=np.float64)
    np.cumsum(matrix, axis=0, out=sums[1:])
    index = np.arange(rows)
    lo = np.maximum(index - half, 0)
    hi = np.minimum(index + half + 1, rows)
    counts = (hi - lo).reshape((rows,) + (1,) * (matrix.ndim - 1))
    result: FloatArray = (sums[hi] - sums[lo]) / counts
    return result


def _sigmoid(z: FloatArray) -> FloatArray:
    result: FloatArray = 1.0 / (1.0 + np.exp(-z))
    return result


def classify_line(row: FloatArray, model: RefModel) -> float:
    """P(reference) for one smoothed density row."""
    if len(row) != len(model.patterns):
        raise ValueError(f"expected {len(model.patterns)} features, got {len(row)}")
    z = float(np.dot(row, model.weights)) + model.intercept
    return 1.0 / (1.0 + math.exp(-z))


def _scores(lines: Sequence[str], model: RefModel) -> FloatArray:
    """Linear scores without the intercept."""
    smoothed = smooth(density_matrix(lines, model), model.window)
    scores: FloatArray = smoothed @ model.weights
    return scores


def line_probabilities(text: str, model: Optional[RefModel] = None) -> FloatArray:
    """Smoothed P(reference) of every line of text."""
    if model is None:
        model = default_model()
    return _sigmoid(_scores(split_lines(text), model) + model.intercept)


def reference_lines(text: str, model: Optional[RefModel] = None) -> List[int]:
    """0-based indices of the lines classified as references."""
    if model is None:
        model = default_model()
    probabilities = line_probabilities(text, model)
    return [int(i) for i in np.flatnonzero(probabilities >= model.threshold)]


def strip_references(
    text: str, model: Optional[RefModel] = None
) -> Tuple[str, List[int]]:
    """Removes reference lines from text.

    Returns:
        The remaining lines joined by LF, and the indices of removed lines.
    """
    flagged = reference_lines(text, model)
    if not flagged:
        return text, []
    skip = set(flagged)
    body = [line for i, line in enumerate(split_lines(text)) if i not in skip]
    logger().info("Stripped %d reference lines", len(flagged))
    return "\n".join(body) + ("\n" if body else ""), flagged


def _labelled_scores(
    model: RefModel, documents: Sequence[LabelledText]
) -> Tuple[FloatArray, npt.NDArray[np.bool_]]:
    scores = []
    labels = []
    for number, document in enumerate(documents):
        lines = split_lines(document.text)
        if len(lines) != len(document.labels):
            raise ValidationError(
                f"document {number}: {len(lines)} lines but "
                f"{len(document.labels)} labels"
            )
        scores.append(_scores(lines, model))
        labels.extend(document.labels)
    if not scores:
        raise UsageError("no labelled documents")
    return np.concatenate(scores), np.array(labels, dtype=bool)


def calibrate_intercept(
    model: RefModel,
    documents: Sequence[LabelledText],
    candidates: Optional[Sequence[float]] = None,
) -> float:
    """Returns the intercept that maximises line accuracy at model.threshold.

    Ties go to the candidate closest to zero.
    """
    scores, labels = _labelled_scores(model, documents)
    if candidates is None:
        candidates = np.round(np.linspace(-3.0, 3.0, 601), 4).tolist()
    logit = math.log(model.threshold / (1.0 - model.threshold))
    best: Optional[Tuple[float, float]] = None
    best_intercept = model.intercept
    for intercept in sorted(candidates, key=abs):
        accuracy = float(np.mean((scores + intercept >= logit) == labels))
        if best is None or accuracy > best[0]:
            best = (accuracy, intercept)
            best_intercept = intercept
    assert best is not None
    logger().info("Best intercept %.4f with line accuracy %.4f", *best)
    return best_intercept


def roc_auc(model: RefModel, documents: Sequence[LabelledText]) -> float:
    """Area under the ROC curve of the per-line reference probabilities."""
    scores, labels = _labelled_scores(model, documents)
    if labels.all() or not labels.any():
        raise UsageError("ROC AUC needs both reference and body lines")
    return float(roc_auc_score(labels, _sigmoid(scores + model.intercept)))
