import json
import random

import pytest

from veatkit.embeddings import VideoEmbedding, write_archive


def synthetic_embeddings(concepts, dim=8, n=4, seed=0, planted=None):
    """Random embeddings for the named concepts.

    ``planted`` maps a concept name to another whose vectors it copies
    exactly (useful to force a known association direction).
    """
    rng = random.Random(seed)
    vectors = {}
    for concept in concepts:
        if planted and concept in planted:
            continue
        vectors[concept] = [
            [rng.uniform(-1.0, 1.0) for _ in range(dim)] for _ in range(n)
        ]
    if planted:
        for concept, source in planted.items():
            vectors[concept] = [list(v) for v in vectors[source]]
    out = []
    for concept in concepts:
        for i, vec in enumerate(vectors[concept]):
            out.append(
                VideoEmbedding(f"{concept}-{i:03d}", concept, vec, n_frames=20)
            )
    return out


def write_synthetic_archive(path, concepts, dim=8, n=4, seed=0, planted=None):
    embeddings = synthetic_embeddings(concepts, dim=dim, n=n, seed=seed,
                                      planted=planted)
    write_archive(embeddings, path)
    return path


def write_battery_config(path, archives, veat_tests=(), scveat_tests=(),
                         correlations=(), seed=7, iterations=2000,
                         exact_threshold=200_000, tie_rule="strict"):
    config = {
        "schema_version": 1,
        "archives": [str(a) for a in archives],
        "permutation": {
            "seed": seed,
            "iterations": iterations,
            "exact_threshold": exact_threshold,
            "tie_rule": tie_rule,
        },
        "veat_tests": list(veat_tests),
        "scveat_tests": list(scveat_tests),
        "correlations": list(correlations),
    }
    path.write_text(json.dumps(config, indent=2))
    return path


@pytest.fixture
def valence_archive(tmp_path):
    """Four 4-vector sets: two targets and the two valence attributes."""
    return write_synthetic_archive(
        tmp_path / "valence.jsonl",
        ["flower", "insect", "pleasant", "unpleasant"],
        dim=6, n=4, seed=3,
    )
