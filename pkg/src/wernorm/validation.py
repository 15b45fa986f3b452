"""Input validation helpers for the estimator API."""

from __future__ import annotations

from typing import Iterable, Sequence

from .corpus import Corpus


def check_token_sequences(X) -> list[tuple[str, ...]]:
    """Coerce estimator input into a list of token tuples.

    Accepts any iterable of token sequences. Strings and Corpus objects are
    rejected here: a bare string is almost always a forgotten tokenize()
    call, and Corpus inputs are dispatched by the caller before validation.
    """
    if isinstance(X, (str, bytes)):
        raise TypeError(
            "expected a collection of token sequences, got a single string; "
            "tokenize it first"
        )
    if isinstance(X, Corpus):
        raise TypeError("Corpus input should be dispatched before validation")
    if not isinstance(X, Iterable):
        raise TypeError(f"expected an iterable of token sequences, got {type(X).__name__}")
    sequences: list[tuple[str, ...]] = []
    for i, row in enumerate(X):
        if isinstance(row, (str, bytes)) or not isinstance(row, (Sequence, Iterable)):
            raise TypeError(
                f"row {i}: expected a sequence of tokens, got {type(row).__name__}"
            )
        tokens = tuple(row)
        for token in tokens:
            if not isinstance(token, str):
                raise TypeError(
                    f"row {i}: tokens must be strings, got {type(token).__name__}"
                )
        sequences.append(tokens)
    return sequences


def check_positive(name: str, value, minimum=1) -> None:
    if not isinstance(value, int) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
