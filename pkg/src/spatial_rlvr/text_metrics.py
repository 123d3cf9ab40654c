"""Token-level WER and ROUGE-1/2/L (F1).

Scores are ratios of integer counts, so they are formed as exact fractions
and rounded to float once.
"""

from __future__ import annotations

import string
from collections import Counter
from fractions import Fraction
from typing import Sequence

TokenSeq = tuple[str, ...]


def normalize(text: str) -> TokenSeq:
    """Lowercase, split on whitespace, strip edge punctuation, drop empties."""
    tokens = (t.strip(string.punctuation) for t in text.lower().split())
    return tuple(t for t in tokens if t)


def edit_distance(hyp: Sequence[str], ref: Sequence[str]) -> int:
    """Unit-cost Levenshtein distance over tokens."""
    prev = list(range(len(ref) + 1))
    for i, h in enumerate(hyp, 1):
        cur = [i] + [0] * len(ref)
        for j, r in enumerate(ref, 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (h != r))
        prev = cur
    return prev[-1]


def word_error_rate(hypothesis: Sequence[str], reference: Sequence[str]) -> float:
    """Edit distance over reference length. Unclamped, so it can exceed 1."""
    if not reference:
        raise ValueError("reference must be non-empty")
    return float(Fraction(edit_distance(hypothesis, reference), len(reference)))


def _f1(overlap: int, n_hyp: int, n_ref: int) -> Fraction:
    # 2PR / (P + R) with P = o / n_hyp and R = o / n_ref reduces to 2o / (n_hyp + n_ref)
    if overlap == 0 or n_hyp == 0 or n_ref == 0:
        return Fraction(0)
    return Fraction(2 * overlap, n_hyp + n_ref)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _rouge_n(hypothesis: Sequence[str], reference: Sequence[str], n: int) -> Fraction:
    if n < 1:
        raise ValueError("n must be >= 1")
    h, r = _ngrams(hypothesis, n), _ngrams(reference, n)
    overlap = sum((h & r).values())
    return _f1(overlap, sum(h.values()), sum(r.values()))


def rouge_n(hypothesis: Sequence[str], reference: Sequence[str], n: int) -> float:
    """ROUGE-N F1 with clipped n-gram counts."""
    return float(_rouge_n(hypothesis, reference, n))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def _rouge_l(hypothesis: Sequence[str], reference: Sequence[str]) -> Fraction:
    return _f1(lcs_length(hypothesis, reference), len(hypothesis), len(reference))


def rouge_l(hypothesis: Sequence[str], reference: Sequence[str]) -> float:
    return float(_rouge_l(hypothesis, reference))


def mean_rouge(hypothesis: Sequence[str], reference: Sequence[str]) -> float:
    """Mean of ROUGE-1, ROUGE-2 and ROUGE-L, averaged before rounding."""
    total = (_rouge_n(hypothesis, reference, 1) + _rouge_n(hypothesis, reference, 2)
             + _rouge_l(hypothesis, reference))
    return float(total / 3)
