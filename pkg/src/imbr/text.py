"""Corpus ingestion, normalization, deduplication and vectorization."""

import io
import os
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from imbr.errors import EmptyVocabulary, FormatError
from imbr.knn import FeatureMatrix

STOPWORDS_ENV = "IMBR_STOPWORDS"


@dataclass(frozen=True)
class Document:
    text: str
    label: str

    def __post_init__(self):
        if not isinstance(self.label, str) or not self.label:
            raise ValueError("document label must be a non-empty string")
        if not isinstance(self.text, str):
            raise ValueError("document text must be a string")


@dataclass(frozen=True)
class LabeledCorpus:
    """Ordered documents plus a label to class-id map in first-appearance order."""

    documents: tuple
    label_index: dict

    @classmethod
    def from_pairs(cls, pairs, label_index=None):
        docs = tuple(d if isinstance(d, Document) else Document(*d) for d in pairs)
        index = dict(label_index) if label_index else {}
        for d in docs:
            if d.label not in index:
                index[d.label] = len(index)
        return cls(docs, index)

    def __len__(self):
        return len(self.documents)

    @property
    def labels(self):
        return [d.label for d in self.documents]

    @property
    def label_names(self):
        return sorted(self.label_index, key=self.label_index.get)

    def class_ids(self):
        return np.array([self.label_index[d.label] for d in self.documents], dtype=np.int64)


def _normalize_word(word, lowercase=True):
    word = word.lower() if lowercase else word
    return "".join(ch for ch in word if unicodedata.category(ch)[0] not in "PS")


def read_stopwords(stream):
    """Parse a one-token-per-line list; ``#`` lines are comments."""
    if isinstance(stream, (bytes, bytearray)):
        stream = io.StringIO(stream.decode("utf-8"))
    words = set()
    for line in stream:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        words.add(line)
    return frozenset(words)


@lru_cache(maxsize=1)
def bundled_stopwords():
    with resources.files("imbr.data").joinpath("stopwords_es.txt").open(encoding="utf-8") as f:
        return read_stopwords(f)


def default_stopwords():
    path = os.environ.get(STOPWORDS_ENV)
    if path:
        with open(path, encoding="utf-8") as f:
            return read_stopwords(f)
    return bundled_stopwords()


@dataclass(frozen=True)
class NormalizeConfig:
    lowercase: bool = True
    strip_punctuation: bool = True
    strip_control_chars: bool = True
    drop_digits: bool = False
    stopwords: frozenset = field(default_factory=default_stopwords)

    def __post_init__(self):
        # stopwords are compared against normalized tokens, so normalize them the same way
        cleaned = set()
        for w in self.stopwords:
            w = _normalize_word(w)
            cleaned.update(w.split())
        object.__setattr__(self, "stopwords", frozenset(cleaned))


def normalize(text, config=None):
    """Lowercase, strip control characters and punctuation, split, drop stopwords.

    Control characters become spaces; punctuation and symbols (Unicode
    categories P* and S*) are deleted.
    """
    config = config or NormalizeConfig()
    if config.lowercase:
        text = text.lower()
    chars = []
    for ch in text:
        cat = unicodedata.category(ch)
        if config.strip_control_chars and cat == "Cc":
            chars.append(" ")
        elif config.strip_punctuation and cat[0] in "PS":
            continue
        elif config.drop_digits and cat == "Nd":
            continue
        else:
            chars.append(ch)
    tokens = "".join(chars).split()
    if config.stopwords:
        tokens = [t for t in tokens if t not in config.stopwords]
    return tokens


def dedupe(corpus, config=None):
    """Drop documents whose (normalized tokens, label) pair was already seen.

    Returns ``(corpus, removed_count)``; the first occurrence is kept.
    """
    config = config or NormalizeConfig()
    seen = set()
    kept = []
    for doc in corpus.documents:
        key = (tuple(normalize(doc.text, config)), doc.label)
        if key in seen:
            continue
        seen.add(key)
        kept.append(doc)
    return LabeledCorpus(tuple(kept), dict(corpus.label_index)), len(corpus) - len(kept)


@dataclass(frozen=True)
class Vocabulary:
    index: dict
    min_frequency: int = 1

    def __len__(self):
        return len(self.index)

    @property
    def tokens(self):
        return sorted(self.index, key=self.index.get)


def build_vocabulary(corpus, config=None, min_frequency=1):
    if min_frequency < 1:
        raise ValueError("min_frequency must be >= 1")
    config = config or NormalizeConfig()
    counts = {}
    for doc in corpus.documents:
        for tok in normalize(doc.text, config):
            counts[tok] = counts.get(tok, 0) + 1
    # dicts keep insertion order, i.e. first appearance in the scan
    kept = [t for t, n in counts.items() if n >= min_frequency]
    if not kept:
        raise EmptyVocabulary(f"no token occurs at least {min_frequency} times")
    return Vocabulary({t: i for i, t in enumerate(kept)}, min_frequency)


def bow_vectorize(corpus, vocab, config=None):
    """Raw token counts over ``vocab``; out-of-vocabulary tokens are ignored."""
    if len(vocab) == 0:
        raise EmptyVocabulary("vocabulary is empty")
    config = config or NormalizeConfig()
    rows = np.zeros((len(corpus), len(vocab)))
    for i, doc in enumerate(corpus.documents):
        for tok in normalize(doc.text, config):
            j = vocab.index.get(tok)
            if j is not None:
                rows[i, j] += 1
    return FeatureMatrix(rows, corpus.class_ids())


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vectors: dict

    def __len__(self):
        return len(self.vectors)

    def __getitem__(self, token):
        return self.vectors[token]

    def __contains__(self, token):
        return token in self.vectors


def parse_embeddings(stream):
    """Read the word2vec text format: a ``V d`` header, then ``token v1 .. vd`` lines."""
    if isinstance(stream, (bytes, bytearray)):
        stream = io.BytesIO(stream)
    lines = iter(stream)
    try:
        header = next(lines)
    except StopIteration:
        raise FormatError("missing header", 1) from None
    parts = _decode(header, 1).split()
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise FormatError(f"header must be two non-negative integers 'V d', got {header!r}", 1)
    n_vectors, dim = int(parts[0]), int(parts[1])
    if dim < 1:
        raise FormatError("embedding dimension must be >= 1", 1)
    vectors = {}
    lineno = 1
    for raw in lines:
        lineno += 1
        line = _decode(raw, lineno)
        if not line.strip():
            if len(vectors) == n_vectors:
                continue
            raise FormatError("blank line inside vector block", lineno)
        if len(vectors) == n_vectors:
            raise FormatError(f"more than the {n_vectors} vectors announced in the header", lineno)
        fields = line.split()
        if len(fields) != dim + 1:
            raise FormatError(f"expected token plus {dim} components, got {len(fields) - 1}", lineno)
        token = fields[0]
        try:
            vec = np.array([float(x) for x in fields[1:]])
        except ValueError:
            raise FormatError("non-numeric component", lineno) from None
        if not np.all(np.isfinite(vec)):
            raise FormatError("non-finite component", lineno)
        if token in vectors:
            raise FormatError(f"duplicate token {token!r}", lineno)
        vectors[token] = vec
    if len(vectors) != n_vectors:
        raise FormatError(f"header announces {n_vectors} vectors, found {len(vectors)}", lineno + 1)
    return EmbeddingTable(dim, vectors)


def _decode(raw, lineno):
    if isinstance(raw, str):
        return raw
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError:
        raise FormatError("invalid UTF-8", lineno) from None


def serialize_embeddings(table):
    out = [f"{len(table)} {table.dim}"]
    for token, vec in table.vectors.items():
        out.append(" ".join([token] + [repr(float(x)) for x in vec]))
    return ("\n".join(out) + "\n").encode("utf-8")


def average_embedding(corpus, table, config=None):
    """Mean vector of in-vocabulary tokens per document; zero vector if none."""
    if table.dim < 1:
        raise ValueError("embedding dimension must be >= 1")
    config = config or NormalizeConfig()
    rows = np.zeros((len(corpus), table.dim))
    for i, doc in enumerate(corpus.documents):
        hits = [table.vectors[t] for t in normalize(doc.text, config) if t in table.vectors]
        if hits:
            rows[i] = np.mean(hits, axis=0)
    return FeatureMatrix(rows, corpus.class_ids())


def distribution_from_counts(counts):
    """``{name: (count, percentage)}`` with unrounded percentages."""
    total = sum(counts.values())
    if total <= 0:
        raise ValueError("distribution needs at least one instance")
    return {name: (int(n), 100.0 * n / total) for name, n in counts.items()}


def class_distribution(corpus):
    if len(corpus) == 0:
        raise ValueError("corpus is empty")
    counts = {name: 0 for name in corpus.label_names}
    for doc in corpus.documents:
        counts[doc.label] += 1
    return distribution_from_counts(counts)
