"""Shared text normalization.

One tokenizer is used everywhere tokens are compared or counted (repetition
scoring, cue matching, topic preprocessing, phrase search) so that the stages
agree on word boundaries: lowercase, split on whitespace, strip leading and
trailing punctuation from each token, drop tokens that are empty afterwards.
"""

from __future__ import annotations

import string

_STRIP_CHARS = string.punctuation + "‘’“”…"


def strip_token(token: str) -> str:
    return token.strip(_STRIP_CHARS)


def tokenize(text: str) -> list[str]:
    out = []
    for raw in text.lower().split():
        tok = strip_token(raw)
        if tok:
            out.append(tok)
    return out


def contains_phrase(tokens: list[str], phrase_tokens: list[str]) -> bool:
    """True if phrase_tokens occurs as a contiguous subsequence of tokens."""
    n = len(phrase_tokens)
    if n == 0 or n > len(tokens):
        return False
    first = phrase_tokens[0]
    for i in range(len(tokens) - n + 1):
        if tokens[i] == first and tokens[i:i + n] == phrase_tokens:
            return True
    return False
