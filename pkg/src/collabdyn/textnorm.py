"""Text normalization: sentence/token segmentation, stopwords, suffix stemming.

The stopword list and the stemmer are shipped with the package and versioned
(:data:`STOPWORDS_VERSION`) because both change the extracted vocabulary;
pinning them keeps vocabulary dumps byte-identical across runs and machines.
"""

from __future__ import annotations

import re

STOPWORDS_VERSION = "1"

# Fixed English stopword list, including a few patent-prose function words
# (said/wherein/thereof...).  Edits require a version bump.
STOPWORDS = frozenset(
    """
    a about above after again against all also am an and any are as at
    be because been before being below between both but by
    can cannot could
    did do does doing down during
    each either
    few for from further
    had has have having he her here hers herself him himself his how however
    i if in into is it its itself
    may me might more most must my myself
    no nor not
    of off on once only onto or other ought our ours ourselves out over own
    same shall she should since so some such
    than that the their theirs them themselves then there thereby therefore
    thereof therein these they this those through thus to too toward towards
    under until unto up upon
    very via
    was we were what when where whereby wherein whether which while who whom
    why will with within without would
    you your yours yourself yourselves
    hereby herein said
    """.split()
)

_SENTENCE_RE = re.compile(r"[.!?;:]+")
_TOKEN_RE = re.compile(r"[a-z0-9]+")


def sentence_tokens(text: str) -> list[list[str]]:
    """Lowercase, split into sentences, and tokenize each.

    Sentence boundaries are ``. ! ? ; :``; tokens are maximal ``[a-z0-9]+``
    runs, so punctuation (and any non-ASCII character) acts as a separator.
    """
    sentences = []
    for part in _SENTENCE_RE.split(text.lower()):
        tokens = _TOKEN_RE.findall(part)
        if tokens:
            sentences.append(tokens)
    return sentences


# ---------------------------------------------------------------------------
# Porter suffix-stripping stemmer (classic 1980 rule set).
#
# Implemented in-package rather than pulled from an NLP toolkit so the
# normalization step is pinned with the stopword list above; a dependency
# upgrade must not silently change the vocabulary.
# ---------------------------------------------------------------------------

_VOWELS = "aeiou"


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        # y after a consonant acts as a vowel ("syzygy"), otherwise consonant
        return True if i == 0 else not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of vowel->consonant transitions: the m of [C](VC)^m[V]."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        if not _is_consonant(stem, i):
            prev_vowel = True
        elif prev_vowel:
            m += 1
            prev_vowel = False
    return m


def _contains_vowel(stem: str) -> bool:
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
    return (
        _is_consonant(word, len(word) - 3)
        and not _is_consonant(word, len(word) - 2)
        and _is_consonant(word, len(word) - 1)
        and word[-1] not in "wxy"
    )


def _step1b_cleanup(stem: str) -> str:
    if stem.endswith(("at", "bl", "iz")):
        return stem + "e"
    if _ends_double_consonant(stem) and stem[-1] not in "lsz":
        return stem[:-1]
    if _measure(stem) == 1 and _ends_cvc(stem):
        return stem + "e"
    return stem


def _longest_rule(word: str, rules: tuple[tuple[str, str], ...]):
    """Longest-suffix match; returns (stem, replacement) or None."""
    best = None
    for suffix, repl in rules:
        if word.endswith(suffix) and (best is None or len(suffix) > len(best[0])):
            best = (suffix, repl)
    if best is None:
        return None
    return word[: len(word) - len(best[0])], best[1]


_STEP2_RULES = (
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
)

_STEP3_RULES = (
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
)

_STEP4_SUFFIXES = (
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
)


def porter_stem(word: str) -> str:
    """Stem one lowercase token; words of length <= 2 pass through."""
    if len(word) <= 2:
        return word

    # step 1a: plurals
    if word.endswith("sses"):
        word = word[:-2]
    elif word.endswith("ies"):
        word = word[:-2]
    elif not word.endswith("ss") and word.endswith("s"):
        word = word[:-1]

    # step 1b: -eed / -ed / -ing
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            word = word[:-1]
    elif word.endswith("ed"):
        stem = word[:-2]
        if _contains_vowel(stem):
            word = _step1b_cleanup(stem)
    elif word.endswith("ing"):
        stem = word[:-3]
        if _contains_vowel(stem):
            word = _step1b_cleanup(stem)

    # step 1c: terminal y
    if word.endswith("y") and _contains_vowel(word[:-1]):
        word = word[:-1] + "i"

    # steps 2 and 3: double and simple suffix mappings (m > 0)
    for rules in (_STEP2_RULES, _STEP3_RULES):
        hit = _longest_rule(word, rules)
        if hit is not None:
            stem, repl = hit
            if _measure(stem) > 0:
                word = stem + repl

    # step 4: drop residual suffixes (m > 1); -ion only after s or t
    suffix = max(
        (s for s in _STEP4_SUFFIXES if word.endswith(s)), key=len, default=None
    )
    if suffix is not None:
        stem = word[: len(word) - len(suffix)]
        if _measure(stem) > 1 and (suffix != "ion" or (stem and stem[-1] in "st")):
            word = stem

    # step 5a: terminal e
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            word = stem

    # step 5b: -ll -> -l
    if _measure(word) > 1 and _ends_double_consonant(word) and word.endswith("l"):
        word = word[:-1]

    return word


def stem_token(token: str) -> str:
    """Stem to a fixpoint, making normalization idempotent.

    A single Porter pass is not idempotent (e.g. lenses -> lens -> len);
    iterating until stable also folds such singular/plural pairs together.
    Each pass shortens or preserves the token, so this terminates.
    """
    while True:
        stemmed = porter_stem(token)
        if stemmed == token:
            return token
        token = stemmed


def normalize_phrase(phrase: str) -> str:
    """Canonical form of a phrase: tokenize, lowercase, stem each token."""
    tokens = _TOKEN_RE.findall(phrase.lower())
    return " ".join(stem_token(t) for t in tokens)
