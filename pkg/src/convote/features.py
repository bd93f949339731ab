"""Tokenization and normalized presence-of-unigram vectors."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import IntegrityError

_SPLIT = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumeric characters.

    >>> tokenize("I second that!")
    ['i', 'second', 'that']
    """
    return [tok for tok in _SPLIT.split(text.lower()) if tok]


@dataclass(frozen=True)
class Vocabulary:
    term_to_index: Mapping[str, int]

    @property
    def size(self) -> int:
        return len(self.term_to_index)

    def __len__(self) -> int:
        return len(self.term_to_index)

    def __contains__(self, term: str) -> bool:
        return term in self.term_to_index

    @classmethod
    def from_terms(cls, terms: Iterable[str]) -> "Vocabulary":
        return cls({term: i for i, term in enumerate(sorted(set(terms)))})

    def save(self, path) -> None:
        lines = [f"{term}\t{index}\n" for term, index in
                 sorted(self.term_to_index.items(), key=lambda kv: kv[1])]
        Path(path).write_text("".join(lines), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        mapping = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line:
                continue
            term, index = line.split("\t")
            mapping[term] = int(index)
        if sorted(mapping.values()) != list(range(len(mapping))):
            raise IntegrityError(f"{path}: indices are not a bijection onto [0, {len(mapping)})")
        return cls(mapping)


def build_vocabulary(train_segments: Iterable) -> Vocabulary:
    """Every distinct token of the given segments, indexed lexicographically.

    Accepts segments (anything with ``.tokens``) or plain token lists.
    """
    terms: set[str] = set()
    for seg in train_segments:
        terms.update(getattr(seg, "tokens", seg))
    return Vocabulary.from_terms(terms)


@dataclass(frozen=True)
class FeatureVector:
    """Sparse vector whose nonzero entries are all equal.

    ``indices`` is sorted and duplicate-free; each stored value is
    ``1/sqrt(len(indices))``.
    """

    indices: tuple[int, ...]
    dim: int

    @property
    def value(self) -> float:
        return 1.0 / math.sqrt(len(self.indices)) if self.indices else 0.0

    @property
    def entries(self) -> dict[int, float]:
        v = self.value
        return {i: v for i in self.indices}

    @property
    def norm(self) -> float:
        v = self.value
        return math.sqrt(sum(v * v for _ in self.indices))

    def is_zero(self) -> bool:
        return not self.indices

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[list(self.indices)] = self.value
        return out


def vectorize_presence(tokens: Sequence[str], vocab: Vocabulary) -> FeatureVector:
    lookup = vocab.term_to_index
    idx = sorted({lookup[t] for t in tokens if t in lookup})
    return FeatureVector(tuple(idx), vocab.size)


def stack(vectors: Sequence[FeatureVector], dim: int | None = None) -> sp.csr_matrix:
    """Rows of a CSR matrix, one per vector."""
    if dim is None:
        dim = vectors[0].dim if vectors else 0
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    cols, vals = [], []
    for r, vec in enumerate(vectors):
        if vec.dim != dim:
            raise IntegrityError(f"vector of dimension {vec.dim} in a batch of dimension {dim}")
        cols.extend(vec.indices)
        vals.extend([vec.value] * len(vec.indices))
        indptr[r + 1] = len(cols)
    return sp.csr_matrix(
        (np.asarray(vals, dtype=np.float64), np.asarray(cols, dtype=np.int64), indptr),
        shape=(len(vectors), dim),
    )
