"""Video embedding data model, frame pooling, and the archive file format.

A video is represented by a single vector obtained by mean-pooling the
embeddings of frames sampled on a fixed-interval schedule. Pooled vectors
are grouped into named concept sets that play target or attribute roles in
the association tests.

Archives are UTF-8 JSON Lines, one record per line with fields
``video_id``, ``concept``, ``dim``, ``n_frames``, ``vector``,
``source_path``. Floats are serialized in shortest round-trip decimal form,
so write-then-read is the identity on valid records.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ArchiveFormatError,
    DimensionMismatchError,
    InvalidInputError,
    ZeroVectorError,
)

ARCHIVE_FIELDS = ("video_id", "concept", "dim", "n_frames", "vector", "source_path")

ROLES = ("target", "attribute")


def _as_float_tuple(values: Iterable[float]) -> tuple[float, ...]:
    out = tuple(float(v) for v in values)
    for v in out:
        if not math.isfinite(v):
            raise InvalidInputError(f"non-finite vector component: {v!r}")
    return out


@dataclass(frozen=True)
class FrameSequence:
    """Raw per-frame embeddings for one video, in sampling order.

    ``timestamps`` are seconds, non-negative and strictly increasing, one
    per frame. All frame vectors must share a single dimension >= 1.
    """

    video_id: str
    timestamps: tuple[float, ...]
    frames: tuple[tuple[float, ...], ...]

    def __init__(
        self,
        video_id: str,
        timestamps: Sequence[float],
        frames: Sequence[Sequence[float]],
    ):
        object.__setattr__(self, "video_id", str(video_id))
        object.__setattr__(self, "timestamps", tuple(float(t) for t in timestamps))
        object.__setattr__(self, "frames", tuple(_as_float_tuple(f) for f in frames))
        self._validate()

    def _validate(self) -> None:
        if len(self.frames) == 0:
            raise InvalidInputError(f"{self.video_id}: empty frame list")
        if len(self.timestamps) != len(self.frames):
            raise InvalidInputError(
                f"{self.video_id}: {len(self.timestamps)} timestamps for "
                f"{len(self.frames)} frames"
            )
        if any(t < 0 for t in self.timestamps):
            raise InvalidInputError(f"{self.video_id}: negative timestamp")
        if any(b <= a for a, b in zip(self.timestamps, self.timestamps[1:])):
            raise InvalidInputError(
                f"{self.video_id}: timestamps must be strictly increasing"
            )
        dim = len(self.frames[0])
        if dim < 1:
            raise InvalidInputError(f"{self.video_id}: zero-dimensional frames")
        if any(len(f) != dim for f in self.frames):
            raise DimensionMismatchError(
                f"{self.video_id}: inconsistent frame dimensions"
            )

    @property
    def dim(self) -> int:
        return len(self.frames[0])


@dataclass(frozen=True)
class VideoEmbedding:
    """A pooled per-video vector with its concept label and provenance.

    The vector may not be all zeros: cosine similarity would be undefined.
    """

    video_id: str
    concept: str
    vector: tuple[float, ...]
    n_frames: int
    source_path: str | None = None

    def __init__(
        self,
        video_id: str,
        concept: str,
        vector: Sequence[float],
        n_frames: int,
        source_path: str | None = None,
    ):
        object.__setattr__(self, "video_id", str(video_id))
        object.__setattr__(self, "concept", str(concept))
        object.__setattr__(self, "vector", _as_float_tuple(vector))
        object.__setattr__(self, "n_frames", int(n_frames))
        object.__setattr__(self, "source_path", source_path)
        if len(self.vector) < 1:
            raise InvalidInputError(f"{self.video_id}: empty vector")
        if self.n_frames < 1:
            raise InvalidInputError(f"{self.video_id}: n_frames must be >= 1")
        if all(v == 0.0 for v in self.vector):
            raise ZeroVectorError(
                f"{self.video_id}: pooled vector is all zeros; cosine undefined"
            )

    @property
    def dim(self) -> int:
        return len(self.vector)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.vector, dtype=np.float64)


@dataclass(frozen=True)
class ConceptSet:
    """A named collection of same-dimension embeddings playing one role.

    At least two members are required (effect sizes need a standard
    deviation) and video ids must be unique within the set.
    """

    name: str
    role: str
    members: tuple[VideoEmbedding, ...] = field(default=())

    def __init__(self, name: str, role: str, members: Sequence[VideoEmbedding]):
        object.__setattr__(self, "name", str(name))
        object.__setattr__(self, "role", str(role))
        object.__setattr__(self, "members", tuple(members))
        if self.role not in ROLES:
            raise InvalidInputError(
                f"{self.name}: role must be one of {ROLES}, got {self.role!r}"
            )
        if len(self.members) < 2:
            raise InvalidInputError(
                f"{self.name}: concept sets need at least 2 members, "
                f"got {len(self.members)}"
            )
        dim = self.members[0].dim
        if any(m.dim != dim for m in self.members):
            raise DimensionMismatchError(f"{self.name}: mixed member dimensions")
        ids = [m.video_id for m in self.members]
        if len(set(ids)) != len(ids):
            dupes = sorted({v for v in ids if ids.count(v) > 1})
            raise InvalidInputError(f"{self.name}: duplicate video ids {dupes}")

    def __len__(self) -> int:
        return len(self.members)

    @property
    def dim(self) -> int:
        return self.members[0].dim

    @property
    def video_ids(self) -> tuple[str, ...]:
        return tuple(m.video_id for m in self.members)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Member vectors stacked row-wise as a read-only float64 array."""
        mat = np.asarray([m.vector for m in self.members], dtype=np.float64)
        mat.setflags(write=False)
        return mat

    @classmethod
    def from_arrays(
        cls,
        name: str,
        role: str,
        vectors: Sequence[Sequence[float]],
        video_ids: Sequence[str] | None = None,
    ) -> "ConceptSet":
        """Build a set from bare vectors, synthesizing ids when absent."""
        if video_ids is None:
            video_ids = [f"{name}-{i:03d}" for i in range(len(vectors))]
        members = [
            VideoEmbedding(vid, name, vec, n_frames=1)
            for vid, vec in zip(video_ids, vectors)
        ]
        return cls(name, role, members)


def sampling_schedule(duration: float, interval: float) -> list[float]:
    """Timestamps ``k * interval`` for k = 0, 1, ... while below ``duration``.

    A 5.0 s duration at the 0.25 s default interval yields exactly 20
    timestamps, 0.00 through 4.75.
    """
    duration = float(duration)
    interval = float(interval)
    if duration <= 0:
        raise InvalidInputError(f"duration must be positive, got {duration}")
    if interval <= 0:
        raise InvalidInputError(f"interval must be positive, got {interval}")
    out = []
    k = 0
    while k * interval < duration:
        out.append(k * interval)
        k += 1
    return out


def pool_frames(
    seq: FrameSequence,
    concept: str = "",
    source_path: str | None = None,
    normalize: bool = False,
) -> VideoEmbedding:
    """Mean-pool a frame sequence into one video embedding.

    The pooled vector is the component-wise arithmetic mean of the frame
    vectors, with no normalization applied. Set ``normalize`` to L2-unit
    each frame before pooling (off by default; normalizing the pooled
    vector itself would be a cosine no-op, so only the pre-pooling variant
    is offered). A pooled all-zeros vector is rejected, not repaired.
    """
    frames = np.asarray(seq.frames, dtype=np.float64)
    if normalize:
        norms = np.linalg.norm(frames, axis=1)
        if np.any(norms == 0.0):
            raise ZeroVectorError(
                f"{seq.video_id}: cannot normalize an all-zeros frame"
            )
        frames = frames / norms[:, None]
    pooled = frames.mean(axis=0)
    if np.all(pooled == 0.0):
        raise ZeroVectorError(f"{seq.video_id}: frames pool to the zero vector")
    return VideoEmbedding(
        video_id=seq.video_id,
        concept=concept,
        vector=pooled.tolist(),
        n_frames=len(seq.frames),
        source_path=source_path,
    )


def _record_to_embedding(rec: dict, line: int) -> VideoEmbedding:
    missing = [f for f in ARCHIVE_FIELDS if f not in rec and f != "source_path"]
    if missing:
        raise ArchiveFormatError(f"missing field(s) {missing}", line)
    vector = rec["vector"]
    if not isinstance(vector, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in vector
    ):
        raise ArchiveFormatError("vector must be a flat numeric array", line)
    if not isinstance(rec["dim"], int) or isinstance(rec["dim"], bool):
        raise ArchiveFormatError(f"dim must be an integer, got {rec['dim']!r}", line)
    if not isinstance(rec["n_frames"], int) or isinstance(rec["n_frames"], bool):
        raise ArchiveFormatError(
            f"n_frames must be an integer, got {rec['n_frames']!r}", line
        )
    if not isinstance(rec["video_id"], str) or not isinstance(rec["concept"], str):
        raise ArchiveFormatError("video_id and concept must be strings", line)
    source_path = rec.get("source_path")
    if source_path is not None and not isinstance(source_path, str):
        raise ArchiveFormatError("source_path must be a string or null", line)
    if len(vector) != rec["dim"]:
        raise ArchiveFormatError(
            f"vector length {len(vector)} != dim {rec['dim']}", line
        )
    try:
        return VideoEmbedding(
            video_id=rec["video_id"],
            concept=rec["concept"],
            vector=vector,
            n_frames=rec["n_frames"],
            source_path=source_path,
        )
    except (InvalidInputError, ZeroVectorError) as exc:
        raise ArchiveFormatError(str(exc), line) from exc


def read_archive(path: str | os.PathLike) -> list[VideoEmbedding]:
    """Read an embedding archive, validating every record.

    Raises :class:`ArchiveFormatError` naming the 1-based line number of
    the first malformed or duplicate record. Blank lines are not allowed.
    """
    embeddings: list[VideoEmbedding] = []
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                raise ArchiveFormatError("blank line in archive", line_no)
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ArchiveFormatError(f"invalid JSON: {exc}", line_no) from exc
            if not isinstance(rec, dict):
                raise ArchiveFormatError("record is not an object", line_no)
            emb = _record_to_embedding(rec, line_no)
            key = (emb.video_id, emb.concept)
            if key in seen:
                raise ArchiveFormatError(
                    f"duplicate (video_id, concept) pair {key}", line_no
                )
            seen.add(key)
            embeddings.append(emb)
    if not embeddings:
        raise ArchiveFormatError(f"{path}: archive is empty")
    return embeddings


def write_archive(
    embeddings: Sequence[VideoEmbedding], path: str | os.PathLike
) -> None:
    """Write embeddings as JSON Lines; write-then-read round-trips exactly.

    Requires a non-empty list, one dimension per concept, and unique
    (video_id, concept) pairs. Float components are emitted in shortest
    round-trip decimal form, which preserves their exact binary values.
    """
    if not embeddings:
        raise InvalidInputError("cannot write an empty archive")
    dims: dict[str, int] = {}
    seen: set[tuple[str, str]] = set()
    for emb in embeddings:
        if dims.setdefault(emb.concept, emb.dim) != emb.dim:
            raise DimensionMismatchError(
                f"concept {emb.concept!r} mixes dims "
                f"{dims[emb.concept]} and {emb.dim}"
            )
        key = (emb.video_id, emb.concept)
        if key in seen:
            raise InvalidInputError(f"duplicate (video_id, concept) pair {key}")
        seen.add(key)
    with open(path, "w", encoding="utf-8") as fh:
        for emb in embeddings:
            rec = {
                "video_id": emb.video_id,
                "concept": emb.concept,
                "dim": emb.dim,
                "n_frames": emb.n_frames,
                "vector": list(emb.vector),
                "source_path": emb.source_path,
            }
            fh.write(json.dumps(rec) + "\n")


def group_by_concept(
    embeddings: Iterable[VideoEmbedding],
) -> dict[str, list[VideoEmbedding]]:
    """Group archive records by concept label, preserving file order."""
    groups: dict[str, list[VideoEmbedding]] = {}
    for emb in embeddings:
        groups.setdefault(emb.concept, []).append(emb)
    return groups


def concept_set(
    embeddings: Iterable[VideoEmbedding], name: str, role: str
) -> ConceptSet:
    """Materialize one named concept set from grouped archive records."""
    groups = group_by_concept(embeddings)
    if name not in groups:
        available = ", ".join(sorted(groups))
        raise InvalidInputError(
            f"unknown concept {name!r}; archive has: {available}"
        )
    return ConceptSet(name, role, groups[name])
