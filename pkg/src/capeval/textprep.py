"""Deterministic text normalization shared by all metrics.

Tokenization follows a simplified PTB-style convention: NFC-normalize,
lowercase, split punctuation into standalone tokens, and split the
contractions 's, n't, 're, 've, 'll, 'd off their host word. Stemming is
the original Porter algorithm. All functions are pure.
"""

from __future__ import annotations

import functools
import re
import unicodedata
from importlib import resources
from pathlib import Path

TokenizedCaption = tuple[str, ...]
StopwordList = frozenset[str]

_CONTRACTION_SPLIT = re.compile(r"(?<=\w)(n't|'s|'re|'ve|'ll|'d)\b")
_TOKEN = re.compile(r"n't|'(?:s|re|ve|ll|d)\b|\w+|[^\w\s]")


def tokenize(raw: str) -> TokenizedCaption:
    """Lowercase and tokenize one caption.

    Punctuation becomes standalone tokens; contiguous whitespace collapses.
    An empty result signals a degenerate caption; callers decide policy.
    """
    text = unicodedata.normalize("NFC", raw).lower()
    text = _CONTRACTION_SPLIT.sub(r" \1", text)
    return tuple(_TOKEN.findall(text))


def remove_stopwords(caption: TokenizedCaption, stop: StopwordList) -> TokenizedCaption:
    """Order-preserving removal of stopword tokens. May return an empty tuple."""
    return tuple(t for t in caption if t not in stop)


def load_stopwords(path: str | Path) -> StopwordList:
    """Read a stopword file: one token per line, '#' lines are comments."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip()
            if not word or word.startswith("#"):
                continue
            words.add(word.lower())
    return frozenset(words)


@functools.lru_cache(maxsize=1)
def default_stopwords() -> StopwordList:
    """The packaged English SMART-style stopword list."""
    text = resources.files("capeval.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(
        line.strip().lower()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


# ---------------------------------------------------------------------------
# Porter stemmer (original 1980 algorithm).
#
# Within each step the longest matching suffix is selected first; if its
# condition fails, no other rule of that step applies.
# ---------------------------------------------------------------------------

_VOWELS = "aeiou"


def _is_consonant(word: str, i: int) -> bool:
    c = word[i]
    if c in _VOWELS:
        return False
    if c == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of vowel-consonant sequences ([C](VC)^m[V])."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        if _is_consonant(stem, i):
            if prev_vowel:
                m += 1
            prev_vowel = False
        else:
            prev_vowel = True
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_double_consonant(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_consonant(word, len(word) - 1)
    )


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    n = len(word)
    return (
        _is_consonant(word, n - 3)
        and not _is_consonant(word, n - 2)
        and _is_consonant(word, n - 1)
        and word[-1] not in "wxy"
    )


def _step1a(word: str) -> str:
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies"):
        return word[:-2]
    if word.endswith("ss"):
        return word
    if word.endswith("s"):
        return word[:-1]
    return word


def _step1b(word: str) -> str:
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            return word[:-1]
        return word
    removed = None
    if word.endswith("ed") and _has_vowel(word[:-2]):
        removed = word[:-2]
    elif word.endswith("ing") and _has_vowel(word[:-3]):
        removed = word[:-3]
    if removed is None:
        return word
    if removed.endswith(("at", "bl", "iz")):
        return removed + "e"
    if _ends_double_consonant(removed) and removed[-1] not in "lsz":
        return removed[:-1]
    if _measure(removed) == 1 and _ends_cvc(removed):
        return removed + "e"
    return removed


def _step1c(word: str) -> str:
    if word.endswith("y") and _has_vowel(word[:-1]):
        return word[:-1] + "i"
    return word


_STEP2_RULES = (
    ("ational", "ate"),
    ("ization", "ize"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("tional", "tion"),
    ("biliti", "ble"),
    ("entli", "ent"),
    ("ousli", "ous"),
    ("alism", "al"),
    ("ation", "ate"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("ator", "ate"),
    ("eli", "e"),
)

_STEP3_RULES = (
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
)

_STEP4_SUFFIXES = (
    "ement",
    "ance",
    "ence",
    "able",
    "ible",
    "ment",
    "ant",
    "ent",
    "ion",
    "ism",
    "ate",
    "iti",
    "ous",
    "ive",
    "ize",
    "al",
    "er",
    "ic",
    "ou",
)


def _apply_rules(word: str, rules, min_measure: int) -> str:
    for suffix, replacement in rules:
        if word.endswith(suffix):
            stem = word[: -len(suffix)]
            if _measure(stem) > min_measure:
                return stem + replacement
            return word
    return word


def _step4(word: str) -> str:
    for suffix in _STEP4_SUFFIXES:
        if word.endswith(suffix):
            stem = word[: -len(suffix)]
            if _measure(stem) > 1:
                if suffix == "ion" and not stem.endswith(("s", "t")):
                    return word
                return stem
            return word
    return word


def _step5a(word: str) -> str:
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1:
            return stem
        if m == 1 and not _ends_cvc(stem):
            return stem
    return word


def _step5b(word: str) -> str:
    if _measure(word) > 1 and _ends_double_consonant(word) and word.endswith("l"):
        return word[:-1]
    return word


@functools.lru_cache(maxsize=None)
def stem(token: str) -> str:
    """Porter stem of a lowercase token; non-alphabetic tokens pass through."""
    if not token:
        raise ValueError("cannot stem an empty token")
    if len(token) <= 2 or not token.isascii() or not token.isalpha():
        return token
    word = _step1a(token)
    word = _step1b(word)
    word = _step1c(word)
    word = _apply_rules(word, _STEP2_RULES, 0)
    word = _apply_rules(word, _STEP3_RULES, 0)
    word = _step4(word)
    word = _step5a(word)
    word = _step5b(word)
    return word
