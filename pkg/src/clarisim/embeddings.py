"""Vector representations, the document collection, and brute-force dense retrieval.

Everything downstream (queries, candidates, documents, intents) is a plain
1-D float vector. The collection is immutable after construction and safe to
share across simulation workers.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"EMBV1\n"


def as_embedding(values, dim: int | None = None) -> np.ndarray:
    """Validate and return a 1-D float64 embedding vector."""
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1 or vec.size == 0:
        raise ValueError(f"embedding must be a non-empty 1-D vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise ValueError("embedding contains non-finite values")
    if dim is not None and vec.size != dim:
        raise ValueError(f"embedding has dim {vec.size}, expected {dim}")
    return vec


def dot(a, b) -> float:
    """Inner product of two embeddings; dims must match."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(a @ b)


@dataclass(frozen=True)
class DocumentCollection:
    """A fixed set of documents with one embedding per doc id."""

    doc_ids: tuple
    vectors: np.ndarray  # shape (n_docs, dim), float64
    _id_array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.doc_ids) != len(set(self.doc_ids)):
            seen = set()
            dup = next(d for d in self.doc_ids if d in seen or seen.add(d))
            raise ValueError(f"duplicate doc id: {dup!r}")
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.doc_ids):
            raise ValueError(
                f"vectors shape {self.vectors.shape} does not match {len(self.doc_ids)} doc ids"
            )
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("collection contains non-finite values")
        object.__setattr__(self, "_id_array", np.asarray(self.doc_ids, dtype=object))
        self.vectors.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.doc_ids)

    def __contains__(self, doc_id) -> bool:
        return doc_id in set(self.doc_ids)


def make_collection(doc_ids, vectors) -> DocumentCollection:
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.size == 0:
        vectors = vectors.reshape(0, int(vectors.shape[-1]) if vectors.ndim == 2 else 0)
    return DocumentCollection(doc_ids=tuple(doc_ids), vectors=vectors)


def retrieve_top_k(query, coll: DocumentCollection, k: int):
    """Exact top-k documents by descending dot product, ties by ascending doc id.

    Returns a list of (doc_id, score) pairs of length min(k, len(coll)).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if len(coll) == 0:
        return []
    query = as_embedding(query)
    if query.size != coll.dim:
        raise ValueError(f"dimension mismatch: query dim {query.size} vs collection dim {coll.dim}")
    scores = coll.vectors @ query
    # lexsort: primary key last -> sort by -score, then by doc id ascending
    order = np.lexsort((coll._id_array, -scores))[: min(k, len(coll))]
    return [(coll.doc_ids[i], float(scores[i])) for i in order]


def save_collection(coll: DocumentCollection, path) -> None:
    """Write the binary embedding file format (f32 values on disk)."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IQ", coll.dim if len(coll) else coll.vectors.shape[1], len(coll)))
        f32 = coll.vectors.astype("<f4")
        for doc_id, vec in zip(coll.doc_ids, f32):
            ident = str(doc_id).encode("utf-8")
            if len(ident) > 0xFFFF:
                raise ValueError(f"doc id too long: {doc_id!r}")
            fh.write(struct.pack("<H", len(ident)))
            fh.write(ident)
            fh.write(vec.tobytes())


def load_collection(path) -> DocumentCollection:
    """Load a collection, auto-detecting the binary format by its magic bytes.

    Files without the magic are parsed as JSON lines ({"id": ..., "vec": [...]}).
    """
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
        if head == MAGIC:
            return _load_binary(fh, path)
    return _load_jsonl(path)


def _load_binary(fh, path) -> DocumentCollection:
    header = fh.read(12)
    if len(header) != 12:
        raise ValueError(f"{path}: truncated header")
    dim, count = struct.unpack("<IQ", header)
    if dim == 0:
        raise ValueError(f"{path}: header declares dim 0")
    ids, rows = [], []
    for rec in range(count):
        raw = fh.read(2)
        if len(raw) != 2:
            raise ValueError(f"{path}: truncated record {rec}")
        (id_len,) = struct.unpack("<H", raw)
        ident = fh.read(id_len).decode("utf-8")
        data = fh.read(4 * dim)
        if len(data) != 4 * dim:
            raise ValueError(f"{path}: truncated values for record {rec} (id {ident!r})")
        ids.append(ident)
        rows.append(np.frombuffer(data, dtype="<f4").astype(np.float64))
    vectors = np.array(rows, dtype=np.float64) if rows else np.empty((0, dim))
    try:
        return make_collection(ids, vectors)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc


def _load_jsonl(path) -> DocumentCollection:
    ids, rows = [], []
    dim = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: not valid JSON ({exc})") from exc
            if "id" not in rec or "vec" not in rec:
                raise ValueError(f"{path}:{lineno}: record missing 'id' or 'vec'")
            vec = as_embedding(rec["vec"])
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise ValueError(
                    f"{path}:{lineno}: record {rec['id']!r} has dim {vec.size}, expected {dim}"
                )
            ids.append(str(rec["id"]))
            rows.append(vec)
    if dim is None:
        raise ValueError(f"{path}: empty JSON-lines embedding file")
    try:
        return make_collection(ids, np.array(rows))
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
