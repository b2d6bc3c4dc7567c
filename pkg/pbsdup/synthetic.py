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
"""Deterministic synthetic corpora for tests and evaluation.

Every generator takes a seeded random.Random so that corpora are reproducible.
"""
from __future__ import annotations

import collections
import random
from typing import DefaultDict, List, NamedTuple, Sequence, Tuple

from pbsdup.encoder import DEFAULT_ALPHABET, Alphabet, encode_word


SYLLABLES = (
    "ba be bi bo ca ce co da de di do fa fe fi ga ge go ha he hi ho ka ke ki "
    "la le li lo lu ma me mi mo mu na ne ni no nu pa pe pi po ra re ri ro ru "
    "sa se si so ta te ti to tu va ve vi wa we ya zo ing ter tion ment ous al "
    "er an en in on st th"
).split()

SURNAMES = (
    "Smith Chen Wang Li Zhang Liu Garcia Muller Tanaka Kim Brown Lee Martin "
    "Rossi Silva Novak Ivanov Cohen Singh Kumar"
).split()

JOURNALS = (
    "Nature",
    "Science",
    "Bioinformatics",
    "Nucleic Acids Res",
    "PLoS One",
    "Genome Biol",
    "J Mol Biol",
    "Cell",
)

CJK_START = 0x4E00
CJK_COUNT = 3000
CJK_PUNCTUATION = "，。"


class LabelledDocument(NamedTuple):
    """A document and, per LF-delimited line, whether it is a reference."""

    text: str
    labels: List[bool]


def vocabulary(rng: random.Random, size: int = 2000) -> List[str]:
    """Distinct pseudo-English words, shortest first."""
    words = set()
    while len(words) < size:
        count = rng.choice((1, 2, 2, 3))
        words.add("".join(rng.choice(SYLLABLES) for _ in range(count)))
    return sorted(words, key=lambda w: (len(w), w))


def english_words(rng: random.Random, count: int, vocab: Sequence[str]) -> List[str]:
    """Words drawn with Zipf-like frequencies from vocab."""
    weights = [1.0 / rank for rank in range(1, len(vocab) + 1)]
    return rng.choices(vocab, weights=weights, k=count)


def sentence(rng: random.Random, vocab: Sequence[str], length: int) -> str:
    words = english_words(rng, length, vocab)
    words[0] = words[0].capitalize()
    if length > 6 and rng.random() < 0.4:
        cut = rng.randint(2, length - 3)
        words[cut] += ","
    return " ".join(words) + "."


def english_text(
    rng: random.Random, word_count: int, vocab: Sequence[str], line_words: int = 12
) -> str:
    """Prose of about word_count words, wrapped every line_words words."""
    words: List[str] = []
    while len(words) < word_count:
        words.extend(sentence(rng, vocab, rng.randint(5, 18)).split(" "))
    words = words[:word_count]
    lines = [
        " ".join(words[i : i + line_words]) for i in range(0, len(words), line_words)
    ]
    return "\n".join(lines) + "\n"


def chinese_text(rng: random.Random, char_count: int, line_chars: int = 40) -> str:
    """CJK text with embedded digits and punctuation, as found in encyclopedias."""
    chars: List[str] = []
    for i in range(char_count):
        roll = rng.random()
        if roll < 0.08:
            chars.append(rng.choice("0123456789"))
        elif roll < 0.14:
            chars.append(rng.choice(CJK_PUNCTUATION))
        else:
            chars.append(chr(CJK_START + rng.randrange(CJK_COUNT)))
        if (i + 1) % line_chars == 0:
            chars.append("\n")
    return "".join(chars) + "\n"


def prose_line(rng: random.Random, vocab: Sequence[str]) -> str:
    return sentence(rng, vocab, rng.randint(8, 16))


def _author(rng: random.Random) -> str:
    initials = rng.choice("ABCDEFGHJKLMNPRSTWXY")
    if rng.random() < 0.5:
        initials += "." + rng.choice("ABCDEFGHJKLMNPRSTWXY")
    return f"{rng.choice(SURNAMES)} {initials}."


def reference_line(rng: random.Random, vocab: Sequence[str], number: int) -> str:
    """A bibliography entry in one of a few common citation styles."""
    authors = ", ".join(_author(rng) for _ in range(rng.randint(1, 3)))
    if rng.random() < 0.5:
        authors += ", et al."
    title = " ".join(english_words(rng, rng.randint(4, 9), vocab)).capitalize()
    year = rng.randint(1975, 2024)
    volume = rng.randint(1, 120)
    first_page = rng.randint(1, 900)
    pages = f"{first_page}-{first_page + rng.randint(3, 30)}"
    journal = rng.choice(JOURNALS)
    style = rng.randrange(3)
    if style == 0:
        line = f"[{number}] {authors} ({year}) {title}. {journal} {volume}: {pages};"
    elif style == 1:
        line = f"{number}. {authors} {title}. {journal}. {year};{volume}:{pages}."
    else:
        line = (
            f"{authors} {year}. {title}. {journal} {volume}, {pages}. "
            f"doi:10.{volume}/{year}"
        )
    return line


def labelled_document(
    rng: random.Random,
    vocab: Sequence[str],
    prose_lines: int,
    reference_lines: int,
    reference_position: str = "end",
) -> LabelledDocument:
    """A prose document with a block of bibliography lines.

    Args:
        reference_position: "end", "middle" or "start".
    """
    body = [prose_line(rng, vocab) for _ in range(prose_lines)]
    refs = [reference_line(rng, vocab, i + 1) for i in range(reference_lines)]
    if reference_position == "end":
        at = len(body)
    elif reference_position == "middle":
        at = len(body) // 2
    elif reference_position == "start":
        at = 0
    else:
        raise ValueError(f"unknown position {reference_position}")
    lines = body[:at] + refs + body[at:]
    labels = [False] * at + [True] * len(refs) + [False] * (len(body) - at)
    return LabelledDocument("\n".join(lines) + "\n", labels)


def labelled_corpus(
    rng: random.Random, documents: int = 60, vocab_size: int = 2000
) -> List[LabelledDocument]:
    """Documents of which every other one carries a reference block."""
    vocab = vocabulary(rng, vocab_size)
    corpus = []
    for number in range(documents):
        refs = rng.randint(5, 20) if number % 2 == 0 else 0
        position = rng.choice(("end", "end", "middle"))
        corpus.append(
            labelled_document(rng, vocab, rng.randint(15, 40), refs, position)
        )
    return corpus


def random_pbs(
    rng: random.Random, length: int, alphabet: Alphabet = DEFAULT_ALPHABET
) -> str:
    return "".join(rng.choices(alphabet.chars, k=length))


def _different(rng: random.Random, char: str, alphabet: Alphabet) -> str:
    return rng.choice([c for c in alphabet.chars if c != char])


def plant_duplicate(
    rng: random.Random,
    query_length: int,
    ref_length: int,
    dup_length: int,
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> Tuple[str, str, int, int]:
    """Random query and reference sharing exactly one dup_length stretch.

    The words on either side of the copy differ, so the shared stretch cannot
    be extended by chance.

    Returns:
        (query, reference, query_start, ref_start)
    """
    if alphabet.size < 2:
        raise ValueError("planting needs at least two characters")
    query = list(random_pbs(rng, query_length, alphabet))
    ref = list(random_pbs(rng, ref_length, alphabet))
    query_start = rng.randint(1, query_length - dup_length - 1)
    ref_start = rng.randint(1, ref_length - dup_length - 1)
    ref[ref_start : ref_start + dup_length] = query[
        query_start : query_start + dup_length
    ]
    ref[ref_start - 1] = _different(rng, query[query_start - 1], alphabet)
    query_end = query_start + dup_length
    ref[ref_start + dup_length] = _different(rng, query[query_end], alphabet)
    return "".join(query), "".join(ref), query_start, ref_start


def words_for_pbs(
    rng: random.Random,
    pbs: str,
    vocab: Sequence[str],
    alphabet: Alphabet = DEFAULT_ALPHABET,
) -> List[str]:
    """Picks vocabulary words that encode to the given sequence."""
    buckets: DefaultDict[str, List[str]] = collections.defaultdict(list)
    for word in vocab:
        buckets[encode_word(word, alphabet)].append(word)
    missing = set(alphabet.chars).difference(buckets)
    if missing:
        raise ValueError(f"vocabulary cannot encode {''.join(sorted(missing))}")
    return [rng.choice(buckets[char]) for char in pbs]
