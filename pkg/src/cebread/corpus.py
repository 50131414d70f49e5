"""Labeled document collection: loading, validation, and CV fold assignment.

The canonical on-disk format is JSONL with one object per line:
``{"id": ..., "text": ..., "label": ..., "source": ...}``. A CSV loader
(header ``id,text,label,source``) and a directory-tree loader
(``<root>/<label>/<id>.txt``) are provided for convenience. Text is stored
verbatim apart from NFC normalization, applied at load time so downstream
character classification is stable.

Corpus and FoldAssignment are immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

import csv
import json
import unicodedata
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .errors import CorpusError
from .seeding import rng_for

GRADE_LEVELS = (1, 2, 3)


@dataclass(frozen=True)
class Document:
    """One labeled text passage."""

    id: str
    text: str
    label: int
    source: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise CorpusError(f"document id must be a non-empty string, got {self.id!r}")
        if not isinstance(self.text, str) or not self.text.strip():
            raise CorpusError(f"document {self.id!r}: text is empty")
        if self.label not in GRADE_LEVELS:
            raise CorpusError(
                f"document {self.id!r}: label must be one of {GRADE_LEVELS}, got {self.label!r}"
            )


@dataclass(frozen=True)
class Corpus:
    """Ordered, duplicate-free collection of Documents."""

    documents: tuple[Document, ...]

    def __post_init__(self) -> None:
        if not self.documents:
            raise CorpusError("corpus is empty")
        seen: set[str] = set()
        for doc in self.documents:
            if doc.id in seen:
                raise CorpusError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(doc.id for doc in self.documents)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(doc.label for doc in self.documents)

    def label_counts(self) -> dict[int, int]:
        counts = {level: 0 for level in GRADE_LEVELS}
        for doc in self.documents:
            counts[doc.label] += 1
        return {level: n for level, n in counts.items() if n}


@dataclass(frozen=True)
class FoldAssignment:
    """Map of document id to fold index in [0, k)."""

    k: int
    assignments: dict[str, int] = field(hash=False)

    def __post_init__(self) -> None:
        if self.k < 2:
            raise CorpusError(f"fold count must be >= 2, got {self.k}")
        bad = {i: f for i, f in self.assignments.items() if not 0 <= f < self.k}
        if bad:
            raise CorpusError(f"fold index out of range for ids {sorted(bad)}")

    def test_ids(self, fold: int) -> list[str]:
        return [doc_id for doc_id, f in self.assignments.items() if f == fold]

    def train_ids(self, fold: int) -> list[str]:
        return [doc_id for doc_id, f in self.assignments.items() if f != fold]


def _normalize(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def _coerce_label(raw: object, where: str) -> int:
    if isinstance(raw, bool):
        raise CorpusError(f"{where}: label must be an integer, got {raw!r}")
    if isinstance(raw, int):
        return raw
    if isinstance(raw, str) and raw.strip().isdigit():
        return int(raw.strip())
    raise CorpusError(f"{where}: label must be an integer, got {raw!r}")


def _document_from_record(record: dict, where: str) -> Document:
    for key in ("id", "text", "label"):
        if key not in record:
            raise CorpusError(f"{where}: missing field {key!r}")
    label = _coerce_label(record["label"], where)
    doc_id = record["id"]
    if not isinstance(doc_id, str):
        doc_id = str(doc_id)
    source = record.get("source")
    if source is not None and not isinstance(source, str):
        source = str(source)
    try:
        return Document(
            id=doc_id,
            text=_normalize(str(record["text"])),
            label=label,
            source=source,
        )
    except CorpusError as exc:
        raise CorpusError(f"{where}: {exc}") from exc


def _load_jsonl(path: Path) -> list[Document]:
    docs = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise CorpusError(f"{path}:{lineno}: expected a JSON object")
            docs.append(_document_from_record(record, f"{path}:{lineno}"))
    return docs


def _load_csv(path: Path) -> list[Document]:
    docs = []
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"id", "text", "label"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise CorpusError(f"{path}: CSV header must contain id,text,label")
        for lineno, row in enumerate(reader, start=2):
            record = {k: v for k, v in row.items() if v is not None}
            if not record.get("source"):
                record.pop("source", None)
            docs.append(_document_from_record(record, f"{path}:{lineno}"))
    return docs


def _load_directory(path: Path) -> list[Document]:
    docs = []
    label_dirs = sorted(p for p in path.iterdir() if p.is_dir())
    if not label_dirs:
        raise CorpusError(f"{path}: no label subdirectories found")
    for label_dir in label_dirs:
        if not label_dir.name.isdigit():
            raise CorpusError(f"{label_dir}: label directory name must be an integer")
        label = int(label_dir.name)
        for txt in sorted(label_dir.glob("*.txt")):
            docs.append(
                _document_from_record(
                    {"id": txt.stem, "text": txt.read_text(encoding="utf-8"), "label": label},
                    str(txt),
                )
            )
    return docs


def load_corpus(path: str | Path, format: str = "jsonl") -> Corpus:
    """Load a corpus from disk.

    ``format`` is one of "jsonl", "csv", or "dir". File order is preserved
    (directory trees are read in sorted order, labels outermost).
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus path does not exist: {path}")
    if format == "jsonl":
        docs = _load_jsonl(path)
    elif format == "csv":
        docs = _load_csv(path)
    elif format in ("dir", "directory"):
        docs = _load_directory(path)
    else:
        raise CorpusError(f"unknown corpus format {format!r} (expected jsonl, csv, or dir)")
    return Corpus(tuple(docs))


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus as canonical JSONL (round-trips through load_corpus)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for doc in corpus:
            record = {"id": doc.id, "text": doc.text, "label": doc.label}
            if doc.source is not None:
                record["source"] = doc.source
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def stratified_folds(
    corpus: Corpus, k: int, seed: int = 0, stratified: bool = True
) -> FoldAssignment:
    """Deterministic k-fold assignment, stratified by label unless disabled.

    Per label, shuffled documents are dealt round-robin from a random
    starting fold, so per-fold counts of any label differ by at most one.
    The same (corpus order, k, seed) always yields the same assignment.
    """
    if k < 2:
        raise CorpusError(f"fold count must be >= 2, got {k}")
    rng = rng_for(seed, "stratified_folds" if stratified else "plain_folds")
    assignments: dict[str, int] = {}
    if stratified:
        groups: dict[int, list[str]] = {}
        for doc in corpus:
            groups.setdefault(doc.label, []).append(doc.id)
        for label in sorted(groups):
            ids = groups[label]
            if len(ids) < k:
                warnings.warn(
                    f"label {label} has only {len(ids)} documents for k={k} folds",
                    stacklevel=2,
                )
            order = rng.permutation(len(ids))
            offset = int(rng.integers(k))
            for pos, idx in enumerate(order):
                assignments[ids[idx]] = (pos + offset) % k
    else:
        ids = list(corpus.ids)
        order = rng.permutation(len(ids))
        for pos, idx in enumerate(order):
            assignments[ids[idx]] = pos % k
    return FoldAssignment(k=k, assignments=assignments)
