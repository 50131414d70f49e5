"""One-shot extraction of document vectors from a corpus JSONL.

Reads ``{"id", "text", ...}`` records, runs each text through a frozen
transformer encoder, and writes one ``{"id", "vector"}`` line per
document behind a metadata header. Texts longer than the model window
are split into non-overlapping chunks and the chunk vectors are averaged
with equal weight, which is enough for short children's books.

The output loads directly with cebread's embedding reader, but nothing
here imports cebread: the JSONL files are the whole interface.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import torch

DEFAULT_MODEL = "bert-base-multilingual-cased"


class EmbedError(Exception):
    pass


def read_corpus(path: str | Path) -> list[tuple[str, str]]:
    """Pull (id, text) pairs out of a corpus JSONL, in file order."""
    path = Path(path)
    if not path.exists():
        raise EmbedError(f"corpus file does not exist: {path}")
    docs: list[tuple[str, str]] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise EmbedError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict) or "id" not in record or "text" not in record:
                raise EmbedError(f"{path}:{lineno}: record needs id and text fields")
            doc_id = str(record["id"])
            text = record["text"]
            if not isinstance(text, str) or not text.strip():
                raise EmbedError(f"{path}:{lineno}: document {doc_id!r} has empty text")
            if doc_id in seen:
                raise EmbedError(f"{path}:{lineno}: duplicate document id {doc_id!r}")
            seen.add(doc_id)
            docs.append((doc_id, text))
    if not docs:
        raise EmbedError(f"corpus file {path} contains no documents")
    return docs


def chunk_ids(token_ids: list[int], capacity: int) -> list[list[int]]:
    """Non-overlapping windows of at most `capacity` tokens."""
    if capacity < 1:
        raise EmbedError(f"chunk capacity must be >= 1, got {capacity}")
    if not token_ids:
        return []
    return [token_ids[i : i + capacity] for i in range(0, len(token_ids), capacity)]


class Embedder:
    """A frozen encoder plus the tokenize/chunk/pool plumbing around it."""

    def __init__(
        self,
        model_name: str = DEFAULT_MODEL,
        pooling: str = "mean",
        max_seq_len: int = 512,
        batch_size: int = 8,
    ):
        if pooling not in ("mean", "cls"):
            raise EmbedError(f"pooling must be mean or cls, got {pooling!r}")
        if max_seq_len < 3:
            # one content token plus the two boundary markers
            raise EmbedError(f"max_seq_len must be >= 3, got {max_seq_len}")
        if batch_size < 1:
            raise EmbedError(f"batch_size must be >= 1, got {batch_size}")
        self.model_name = model_name
        self.pooling = pooling
        self.max_seq_len = max_seq_len
        self.batch_size = batch_size

        from transformers import AutoModel, AutoTokenizer

        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_name)
            self.model = AutoModel.from_pretrained(model_name)
        except Exception as exc:
            raise EmbedError(f"cannot load model {model_name!r}: {exc}") from exc
        self.model.eval()
        for token_id, name in (
            (self.tokenizer.cls_token_id, "cls"),
            (self.tokenizer.sep_token_id, "sep"),
            (self.tokenizer.pad_token_id, "pad"),
        ):
            if token_id is None:
                raise EmbedError(f"tokenizer for {model_name!r} has no {name} token")
        self.dim = int(self.model.config.hidden_size)

    def split_text(self, text: str) -> list[list[int]]:
        ids = self.tokenizer(text, add_special_tokens=False)["input_ids"]
        return chunk_ids(ids, self.max_seq_len - 2)

    def _pool(self, hidden: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        if self.pooling == "cls":
            return hidden[:, 0, :]
        mask = mask.unsqueeze(-1).to(hidden.dtype)
        return (hidden * mask).sum(dim=1) / mask.sum(dim=1)

    def _run_batch(self, batch: list[list[int]]) -> torch.Tensor:
        # Every sequence is padded to the full window so a chunk's numbers
        # never depend on what else shares its batch.
        cls_id = self.tokenizer.cls_token_id
        sep_id = self.tokenizer.sep_token_id
        pad_id = self.tokenizer.pad_token_id
        length = self.max_seq_len
        input_ids = torch.full((len(batch), length), pad_id, dtype=torch.long)
        mask = torch.zeros((len(batch), length), dtype=torch.long)
        for row, chunk in enumerate(batch):
            seq = [cls_id, *chunk, sep_id]
            input_ids[row, : len(seq)] = torch.tensor(seq, dtype=torch.long)
            mask[row, : len(seq)] = 1
        with torch.no_grad():
            out = self.model(input_ids=input_ids, attention_mask=mask)
        return self._pool(out.last_hidden_state, mask)

    def embed_documents(self, texts: list[str], names: list[str] | None = None) -> np.ndarray:
        """One vector per text: chunk, encode in batches, average chunks."""
        chunks: list[list[int]] = []
        owner: list[int] = []
        for doc_index, text in enumerate(texts):
            doc_chunks = self.split_text(text)
            if not doc_chunks:
                label = repr(names[doc_index]) if names else f"at position {doc_index}"
                raise EmbedError(f"document {label} produced no tokens")
            chunks.extend(doc_chunks)
            owner.extend([doc_index] * len(doc_chunks))

        pooled = []
        for start in range(0, len(chunks), self.batch_size):
            pooled.append(self._run_batch(chunks[start : start + self.batch_size]))
        vectors = torch.cat(pooled, dim=0).numpy().astype(np.float64)

        out = np.zeros((len(texts), self.dim))
        counts = np.zeros(len(texts))
        for row, doc_index in enumerate(owner):
            out[doc_index] += vectors[row]
            counts[doc_index] += 1
        return out / counts[:, None]


def embed_corpus(
    corpus_path: str | Path,
    out_path: str | Path,
    model_name: str = DEFAULT_MODEL,
    pooling: str = "mean",
    max_seq_len: int = 512,
    batch_size: int = 8,
) -> int:
    """Embed every corpus document; returns the number of records written."""
    docs = read_corpus(corpus_path)
    embedder = Embedder(
        model_name, pooling=pooling, max_seq_len=max_seq_len, batch_size=batch_size
    )
    vectors = embedder.embed_documents(
        [text for _, text in docs], names=[doc_id for doc_id, _ in docs]
    )
    if not np.all(np.isfinite(vectors)):
        raise EmbedError("model produced non-finite values")

    out_path = Path(out_path)
    header = {"dim": embedder.dim, "model": model_name, "pooling": pooling}
    with out_path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for (doc_id, _), vector in zip(docs, vectors):
            record = {"id": doc_id, "vector": [float(v) for v in vector]}
            fh.write(json.dumps(record) + "\n")
    return len(docs)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="embed",
        description="Write one embedding vector per corpus document as JSONL.",
    )
    parser.add_argument("--corpus", required=True, help="corpus JSONL with id and text")
    parser.add_argument("--out", required=True, help="output JSONL path")
    parser.add_argument("--model", default=DEFAULT_MODEL, help="model name or local path")
    parser.add_argument("--pooling", choices=["mean", "cls"], default="mean")
    parser.add_argument("--max-seq-len", type=int, default=512)
    parser.add_argument("--batch-size", type=int, default=8)
    args = parser.parse_args(argv)
    try:
        written = embed_corpus(
            args.corpus,
            args.out,
            model_name=args.model,
            pooling=args.pooling,
            max_seq_len=args.max_seq_len,
            batch_size=args.batch_size,
        )
    except EmbedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {written} vectors to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
