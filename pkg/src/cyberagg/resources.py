"""Read-only lookup resources: word vectors, emotion lexicon, tokenizer.

The tokenizer is a greedy forward maximum-match against the word-vector
vocabulary (longest candidate 8 characters, whitespace skipped, single
characters as fallback), which keeps segmentation deterministic without an
external segmenter.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

EMOTIONS = ("anger", "disgust", "happiness", "sadness", "fear")

MAX_TOKEN_CHARS = 8


@dataclass
class WordVectorTable:
    dimension: int
    entries: dict[str, np.ndarray]
    _max_key_len: int = field(init=False, repr=False)

    def __post_init__(self):
        self._max_key_len = max((len(k) for k in self.entries), default=1)

    def __contains__(self, token: str) -> bool:
        return token in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, token: str):
        return self.entries.get(token)

    def tokenize(self, text: str) -> list[str]:
        """Greedy forward maximum-match segmentation of `text`."""
        vocab = self.entries
        limit = min(MAX_TOKEN_CHARS, self._max_key_len)
        tokens: list[str] = []
        i, n = 0, len(text)
        while i < n:
            ch = text[i]
            if ch.isspace():
                i += 1
                continue
            for length in range(min(limit, n - i), 1, -1):
                candidate = text[i : i + length]
                if candidate in vocab:
                    tokens.append(candidate)
                    i += length
                    break
            else:
                tokens.append(ch)
                i += 1
        return tokens


def load_word_vectors(path) -> WordVectorTable:
    """Text file, one 'token v1 .. vD' line each; an optional leading
    'count dim' header line is auto-detected."""
    entries: dict[str, np.ndarray] = {}
    dimension = None
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            if line_no == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    continue  # header line
                except ValueError:
                    pass
            token = parts[0]
            try:
                vector = np.array([float(v) for v in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: bad vector value: {exc}") from exc
            if vector.size == 0:
                raise DataError(f"{path}:{line_no}: token {token!r} has no vector")
            if dimension is None:
                dimension = int(vector.size)
            elif vector.size != dimension:
                raise DataError(
                    f"{path}:{line_no}: vector width {vector.size} != {dimension}"
                )
            entries[token] = vector
    if not entries:
        raise DataError(f"{path}: no word vectors found")
    return WordVectorTable(dimension=dimension, entries=entries)


@dataclass
class EmotionLexicon:
    mapping: dict[str, str]  # token -> one of EMOTIONS

    def __len__(self) -> int:
        return len(self.mapping)

    def tokens_for(self, emotion: str) -> list[str]:
        return [t for t, e in self.mapping.items() if e == emotion]


def load_emotion_lexicon(path) -> EmotionLexicon:
    """CSV with header token,emotion; each token maps to exactly one emotion."""
    mapping: dict[str, str] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["token", "emotion"]:
            raise DataError(f"{path}: bad lexicon header, expected token,emotion")
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise DataError(f"{path}:{row_no}: expected 2 fields")
            token, emotion = row
            if emotion not in EMOTIONS:
                raise DataError(f"{path}:{row_no}: unknown emotion {emotion!r}")
            if token in mapping and mapping[token] != emotion:
                raise DataError(f"{path}:{row_no}: token {token!r} mapped to two emotions")
            mapping[token] = emotion
    return EmotionLexicon(mapping=mapping)


def write_emotion_lexicon(lex: EmotionLexicon, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["token", "emotion"])
        for token, emotion in lex.mapping.items():
            writer.writerow([token, emotion])


def write_word_vectors(table: WordVectorTable, path, header: bool = True) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"{len(table.entries)} {table.dimension}\n")
        for token, vector in table.entries.items():
            fh.write(token + " " + " ".join(f"{v:.8g}" for v in vector) + "\n")
