"""Word-level minimum-edit alignment and WER/WERR computation."""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

from .corpus import Corpus

Equality = Callable[[str, str], bool]


class AlignStep(NamedTuple):
    op: str  # "match" | "sub" | "del" | "ins"
    ref: str | None
    hyp: str | None


@dataclass(frozen=True)
class AlignmentResult:
    """Edit-operation counts plus the full alignment trace."""

    substitutions: int
    deletions: int
    insertions: int
    ref_len: int
    ops: tuple[AlignStep, ...]

    @property
    def matches(self) -> int:
        return self.ref_len - self.substitutions - self.deletions

    @property
    def hyp_len(self) -> int:
        return self.substitutions + self.insertions + self.matches

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions


@dataclass(frozen=True)
class WerScore:
    errors: int
    ref_len: int
    wer: float  # percent


def align(
    reference: Sequence[str],
    hypothesis: Sequence[str],
    equal: Equality | None = None,
) -> AlignmentResult:
    """Minimum-cost alignment of two token sequences under unit edit costs.

    The `equal` predicate defaults to exact string equality; passing a
    class-aware predicate makes words from the same equivalence class align
    as matches. Backtracking prefers match over substitution over deletion
    over insertion, so the op sequence is deterministic for a given input.
    """
    if equal is None:
        equal = operator.eq
    n, m = len(reference), len(hypothesis)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dp[i][0] = i
    for j in range(1, m + 1):
        dp[0][j] = j
    for i in range(1, n + 1):
        ref_word = reference[i - 1]
        prev, row = dp[i - 1], dp[i]
        for j in range(1, m + 1):
            sub_cost = 0 if equal(ref_word, hypothesis[j - 1]) else 1
            row[j] = min(prev[j - 1] + sub_cost, prev[j] + 1, row[j - 1] + 1)

    steps: list[AlignStep] = []
    subs = dels = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and equal(reference[i - 1], hypothesis[j - 1]) and dp[i][j] == dp[i - 1][j - 1]:
            steps.append(AlignStep("match", reference[i - 1], hypothesis[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dp[i][j] == dp[i - 1][j - 1] + 1:
            steps.append(AlignStep("sub", reference[i - 1], hypothesis[j - 1]))
            subs += 1
            i, j = i - 1, j - 1
        elif i > 0 and dp[i][j] == dp[i - 1][j] + 1:
            steps.append(AlignStep("del", reference[i - 1], None))
            dels += 1
            i -= 1
        else:
            steps.append(AlignStep("ins", None, hypothesis[j - 1]))
            ins += 1
            j -= 1
    steps.reverse()
    return AlignmentResult(subs, dels, ins, n, tuple(steps))


def corpus_wer(corpus: Corpus, equal: Equality | None = None) -> WerScore:
    """Corpus-level WER: summed edit errors over summed reference lengths.

    This is the micro-average (aggregate errors divided by aggregate
    reference word count), not a mean of per-utterance rates. Raises
    ValueError when the corpus has no reference tokens at all.
    """
    errors = 0
    ref_len = 0
    for utt in corpus:
        result = align(utt.reference, utt.hypothesis, equal)
        errors += result.errors
        ref_len += result.ref_len
    if ref_len == 0:
        raise ValueError("WER is undefined: corpus contains no reference tokens")
    return WerScore(errors, ref_len, errors / ref_len * 100.0)


def werr(base_wer: float, norm_wer: float) -> float:
    """Relative WER reduction in percent; positive when normalization helped."""
    if base_wer <= 0:
        raise ValueError("WERR is undefined for a base WER of zero")
    return (base_wer - norm_wer) / base_wer * 100.0
