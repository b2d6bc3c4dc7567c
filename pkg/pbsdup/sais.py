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
"""Linear-time suffix array construction by induced sorting (SA-IS)."""
from typing import List, Sequence


# Below this length a comparison sort is faster than the induced passes.
NAIVE_THRESHOLD = 10


def _naive_suffix_array(text: Sequence[int]) -> List[int]:
    return sorted(range(len(text)), key=lambda i: list(text[i:]))


def _build_type_map(text: Sequence[int]) -> List[bool]:
    """Returns True for S-type positions, False for L-type positions.

    The last position is L-type: the implicit end of text sorts lower.
    """
    n = len(text)
    is_s = [False] * n
    for i in range(n - 2, -1, -1):
        if text[i] == text[i + 1]:
            is_s[i] = is_s[i + 1]
        else:
            is_s[i] = text[i] < text[i + 1]
    return is_s


def _bucket_starts(
    text: Sequence[int], is_s: List[bool], upper: int
) -> tuple[List[int], List[int]]:
    """Start offsets of the L-type and S-type regions of every bucket."""
    l_starts = [0] * (upper + 2)
    s_starts = [0] * (upper + 1)
    for i, char in enumerate(text):
        if is_s[i]:
            l_starts[char + 1] += 1
        else:
            s_starts[char] += 1
    for char in range(upper + 1):
        s_starts[char] += l_starts[char]
        l_starts[char + 1] += s_starts[char]
    return l_starts, s_starts


def _induce(
    text: Sequence[int],
    is_s: List[bool],
    lms: Sequence[int],
    l_starts: List[int],
    s_starts: List[int],
    suffix_array: List[int],
) -> None:
    n = len(text)
    for i in range(n):
        suffix_array[i] = -1

    heads = s_starts[:]
    for pos in lms:
        if pos == n:
            continue
        char = text[pos]
        suffix_array[heads[char]] = pos
        heads[char] += 1

    # L-type suffixes, scanning left to right.
    heads = l_starts[:]
    char = text[n - 1]
    suffix_array[heads[char]] = n - 1
    heads[char] += 1
    for i in range(n):
        pos = suffix_array[i]
        if pos >= 1 and not is_s[pos - 1]:
            char = text[pos - 1]
            suffix_array[heads[char]] = pos - 1
            heads[char] += 1

    # S-type suffixes, scanning right to left from the bucket tails.
    tails = l_starts[:]
    for i in range(n - 1, -1, -1):
        pos = suffix_array[i]
        if pos >= 1 and is_s[pos - 1]:
            char = text[pos - 1] + 1
            tails[char] -= 1
            suffix_array[tails[char]] = pos - 1


def _lms_substrings_equal(
    text: Sequence[int], left: int, left_end: int, right: int, right_end: int
) -> bool:
    if left_end - left != right_end - right:
        return False
    n = len(text)
    while left < left_end:
        if text[left] != text[right]:
            return False
        left += 1
        right += 1
    if left == n or right == n:
        return False
    return text[left] == text[right]


def suffix_array(text: Sequence[int], upper: int) -> List[int]:
    """Computes the suffix array of text.

    A suffix that is a proper prefix of another sorts first, which is the order
    obtained by appending a unique smallest sentinel.

    Args:
        text: Symbols in 0..upper.
        upper: Largest symbol value.

    Returns:
        Start positions of the suffixes of text in lexicographic order.
    """
    n = len(text)
    if n < NAIVE_THRESHOLD:
        return _naive_suffix_array(text)

    is_s = _build_type_map(text)
    l_starts, s_starts = _bucket_starts(text, is_s, upper)

    lms_names = [-1] * (n + 1)
    lms: List[int] = []
    for i in range(1, n):
        if not is_s[i - 1] and is_s[i]:
            lms_names[i] = len(lms)
            lms.append(i)

    result = [-1] * n
    _induce(text, is_s, lms, l_starts, s_starts, result)
    if not lms:
        return result

    # Name the LMS substrings in their induced order and recurse on the names
    # when they are not all distinct.
    sorted_lms = [pos for pos in result if lms_names[pos] != -1]
    num_lms = len(lms)
    reduced = [0] * num_lms
    name = 0
    reduced[lms_names[sorted_lms[0]]] = 0
    for i in range(1, num_lms):
        left = sorted_lms[i - 1]
        right = sorted_lms[i]
        left_index = lms_names[left] + 1
        right_index = lms_names[right] + 1
        left_end = lms[left_index] if left_index < num_lms else n
        right_end = lms[right_index] if right_index < num_lms else n
        if not _lms_substrings_equal(text, left, left_end, right, right_end):
            name += 1
        reduced[lms_names[right]] = name

    reduced_sa = suffix_array(reduced, name)
    sorted_lms = [lms[i] for i in reduced_sa]
    _induce(text, is_s, sorted_lms, l_starts, s_starts, result)
    return result
