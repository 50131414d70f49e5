from .embed import EmbedError, Embedder, chunk_ids, embed_corpus, read_corpus

__all__ = ["EmbedError", "Embedder", "chunk_ids", "embed_corpus", "read_corpus"]
