"""TRAD and SYLL feature extraction, embedding loading, matrix assembly.

Feature extraction is strictly per-document: no corpus-level statistics
leak into a document's vector, so documents can be processed in any order
or concurrently. Standardization (needed by the linear models) is a
separate, explicit step that carries its fitted statistics so train-fold
stats can be applied to test folds.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus, Document
from .errors import EmbeddingError, FeatureError
from .textproc import split_sentences, syllabify, syllable_count, tokenize

TRAD_FEATURES = (
    "unique_words",
    "word_count",
    "average_word_len",
    "average_syllable_count",
    "sentence_count",
    "average_sentence_len",
    "polysyll_count",
)

# Whole-syllable shapes counted for the densities, in schema order.
SYLL_PATTERNS = ("V", "CV", "CC", "VC", "CVC", "CCV", "CCVC")

SYLL_FEATURES = (
    "v_density",
    "cv_density",
    "cc_density",
    "vc_density",
    "cvc_density",
    "ccv_density",
    "ccvc_density",
    "consonant_cluster",
)

FEATURE_SETS = ("TRAD", "SYLL", "NEURAL")

POLYSYLLABLE_MIN = 3  # >=3 syllables marks a polysyllabic word


@dataclass(frozen=True)
class FeatureVector:
    """Named, ordered numeric features for one document."""

    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if len(self.names) != len(set(self.names)):
            raise FeatureError("feature names must be unique")
        if values.ndim != 1 or len(self.names) != values.shape[0]:
            raise FeatureError(
                f"{len(self.names)} names but {values.shape} values"
            )
        if not np.all(np.isfinite(values)):
            bad = [n for n, v in zip(self.names, values) if not math.isfinite(v)]
            raise FeatureError(f"non-finite feature values: {bad}")

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, self.values)}


@dataclass(frozen=True)
class FeatureMatrix:
    """Row-per-document feature matrix with ids, schema, and labels."""

    doc_ids: tuple[str, ...]
    schema: tuple[str, ...]
    X: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "labels", labels)
        if X.ndim != 2 or X.shape != (len(self.doc_ids), len(self.schema)):
            raise FeatureError(
                f"matrix shape {X.shape} does not match "
                f"{len(self.doc_ids)} ids x {len(self.schema)} features"
            )
        if labels.shape != (len(self.doc_ids),):
            raise FeatureError("one label per row required")
        if len(self.schema) != len(set(self.schema)):
            raise FeatureError("schema names must be unique")
        if not np.all(np.isfinite(X)):
            raise FeatureError("matrix contains non-finite values")

    @property
    def n_rows(self) -> int:
        return len(self.doc_ids)

    def subset(self, rows) -> "FeatureMatrix":
        rows = np.asarray(rows)
        return FeatureMatrix(
            doc_ids=tuple(self.doc_ids[i] for i in rows),
            schema=self.schema,
            X=self.X[rows],
            labels=self.labels[rows],
        )

    def row(self, i: int) -> FeatureVector:
        return FeatureVector(names=self.schema, values=self.X[i])


@dataclass(frozen=True)
class EmbeddingStore:
    """Immutable id -> vector map with a uniform dimension."""

    dim: int | None
    vectors: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.vectors)

    def get(self, doc_id: str) -> np.ndarray:
        if doc_id not in self.vectors:
            raise EmbeddingError(f"missing embedding for document {doc_id!r}")
        return self.vectors[doc_id]


def _document_tokens(doc: Document):
    sentences = split_sentences(doc.text)
    tokens = [tok for sent in sentences for tok in tokenize(sent)]
    if not tokens:
        raise FeatureError(f"empty document: {doc.id!r} has no word tokens")
    return sentences, tokens


def trad_features(doc: Document) -> FeatureVector:
    """The seven surface features, in TRAD_FEATURES order.

    Averages are per word (letters per word, syllables per word) and per
    sentence (words per sentence). unique_words counts distinct lowercase
    surfaces; polysyll_count counts words with >= 3 syllables.
    """
    sentences, tokens = _document_tokens(doc)
    n_words = len(tokens)
    n_sentences = len(sentences)
    syllables_per_word = [syllable_count(tok) for tok in tokens]
    values = [
        len({tok.surface for tok in tokens}),
        n_words,
        sum(tok.letter_count for tok in tokens) / n_words,
        sum(syllables_per_word) / n_words,
        n_sentences,
        n_words / n_sentences,
        sum(1 for s in syllables_per_word if s >= POLYSYLLABLE_MIN),
    ]
    return FeatureVector(names=TRAD_FEATURES, values=np.array(values, dtype=float))


def _cluster_count(skeleton: str) -> int:
    """Maximal runs of >= 2 consecutive C units."""
    count = 0
    run = 0
    for unit in skeleton:
        if unit == "C":
            run += 1
        else:
            if run >= 2:
                count += 1
            run = 0
    if run >= 2:
        count += 1
    return count


def syll_features(doc: Document) -> FeatureVector:
    """Syllable-pattern densities plus consonant clusters, per word.

    Each density counts syllables whose skeleton equals the pattern exactly
    (a whole-syllable property, so the seven densities are mutually
    exclusive per syllable), divided by the word count. consonant_cluster
    counts maximal C-runs of length >= 2 across word skeletons, divided by
    the word count.
    """
    _, tokens = _document_tokens(doc)
    n_words = len(tokens)
    pattern_counts = {p: 0 for p in SYLL_PATTERNS}
    clusters = 0
    for tok in tokens:
        for syl in syllabify(tok.skeleton):
            if syl in pattern_counts:
                pattern_counts[syl] += 1
        clusters += _cluster_count(tok.skeleton)
    values = [pattern_counts[p] / n_words for p in SYLL_PATTERNS]
    values.append(clusters / n_words)
    return FeatureVector(names=SYLL_FEATURES, values=np.array(values, dtype=float))


def load_embeddings(path: str | Path) -> EmbeddingStore:
    """Load an embeddings JSONL file into an EmbeddingStore.

    Each line is ``{"id": <string>, "vector": [<float> x dim]}``. An
    optional leading metadata line ``{"dim": ..., ...}`` (no "id" field) is
    validated against the records and skipped. The dimension is inferred
    from the first record and must be uniform.
    """
    path = Path(path)
    if not path.exists():
        raise EmbeddingError(f"embeddings file does not exist: {path}")
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    declared_dim: int | None = None
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EmbeddingError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise EmbeddingError(f"{path}:{lineno}: expected a JSON object")
            if "id" not in record and "vector" not in record:
                # metadata header, allowed only before any record
                if vectors:
                    raise EmbeddingError(f"{path}:{lineno}: metadata line after records")
                if "dim" in record:
                    declared_dim = int(record["dim"])
                continue
            if "id" not in record or "vector" not in record:
                raise EmbeddingError(f"{path}:{lineno}: record needs both id and vector")
            vec = np.asarray(record["vector"], dtype=float)
            if vec.ndim != 1 or vec.size == 0:
                raise EmbeddingError(f"{path}:{lineno}: vector must be a non-empty list")
            if not np.all(np.isfinite(vec)):
                raise EmbeddingError(f"{path}:{lineno}: vector has non-finite values")
            if dim is None:
                dim = vec.size
                if declared_dim is not None and declared_dim != dim:
                    raise EmbeddingError(
                        f"{path}:{lineno}: vector dim {vec.size} does not match "
                        f"declared dim {declared_dim}"
                    )
            elif vec.size != dim:
                raise EmbeddingError(
                    f"{path}:{lineno}: vector dim {vec.size} does not match first record dim {dim}"
                )
            doc_id = str(record["id"])
            if doc_id in vectors:
                raise EmbeddingError(f"{path}:{lineno}: duplicate embedding id {doc_id!r}")
            vectors[doc_id] = vec
    if dim is None and declared_dim is not None:
        dim = declared_dim
    return EmbeddingStore(dim=dim, vectors=vectors)


def neural_feature_names(dim: int) -> tuple[str, ...]:
    width = max(3, len(str(dim - 1)))
    return tuple(f"neural_{i:0{width}d}" for i in range(dim))


def assemble(
    corpus: Corpus,
    sets,
    embeddings: EmbeddingStore | None = None,
) -> FeatureMatrix:
    """Build the feature matrix for an ablation set.

    ``sets`` is any non-empty subset of {"TRAD", "SYLL", "NEURAL"}; columns
    are always concatenated in that fixed order regardless of how the
    subset is spelled. NEURAL requires an EmbeddingStore covering every
    document id.
    """
    chosen = {s.upper() for s in sets}
    unknown = chosen - set(FEATURE_SETS)
    if unknown:
        raise FeatureError(f"unknown feature sets: {sorted(unknown)}")
    if not chosen:
        raise FeatureError("at least one feature set is required")
    if "NEURAL" in chosen:
        if embeddings is None:
            raise FeatureError("NEURAL features requested but no embeddings provided")
        if embeddings.dim is None:
            raise EmbeddingError("embedding store is empty")

    schema: list[str] = []
    if "TRAD" in chosen:
        schema.extend(TRAD_FEATURES)
    if "SYLL" in chosen:
        schema.extend(SYLL_FEATURES)
    if "NEURAL" in chosen:
        schema.extend(neural_feature_names(embeddings.dim))

    rows = []
    for doc in corpus:
        parts = []
        if "TRAD" in chosen:
            parts.append(trad_features(doc).values)
        if "SYLL" in chosen:
            parts.append(syll_features(doc).values)
        if "NEURAL" in chosen:
            parts.append(embeddings.get(doc.id))
        rows.append(np.concatenate(parts))
    return FeatureMatrix(
        doc_ids=corpus.ids,
        schema=tuple(schema),
        X=np.vstack(rows),
        labels=np.array(corpus.labels, dtype=int),
    )


@dataclass(frozen=True)
class ColumnStats:
    """Per-column mean and population stddev fitted on some matrix."""

    schema: tuple[str, ...]
    mean: np.ndarray
    std: np.ndarray


def standardize(
    matrix: FeatureMatrix, stats: ColumnStats | None = None
) -> tuple[FeatureMatrix, ColumnStats]:
    """Transform each column to (x - mean) / stddev and return stats used.

    With ``stats`` given (fitted on train rows), those statistics are
    applied unchanged; otherwise they are computed from this matrix.
    Zero-variance columns map to all zeros.
    """
    if stats is None:
        mean = matrix.X.mean(axis=0)
        std = matrix.X.std(axis=0)
        stats = ColumnStats(schema=matrix.schema, mean=mean, std=std)
    elif stats.schema != matrix.schema:
        raise FeatureError("standardization stats schema does not match matrix schema")
    divisor = np.where(stats.std == 0.0, 1.0, stats.std)
    transformed = (matrix.X - stats.mean) / divisor
    out = FeatureMatrix(
        doc_ids=matrix.doc_ids,
        schema=matrix.schema,
        X=transformed,
        labels=matrix.labels,
    )
    return out, stats


def matrix_to_csv(matrix: FeatureMatrix, path: str | Path) -> None:
    """Write ``id,label,<features...>`` CSV. Floats use repr, so reruns are
    byte-identical."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label", *matrix.schema])
        for i, doc_id in enumerate(matrix.doc_ids):
            writer.writerow(
                [doc_id, int(matrix.labels[i]), *[repr(float(v)) for v in matrix.X[i]]]
            )
