import numpy as np
import pytest

from litatlas.config import PipelineConfig
from litatlas.documents import Document
from litatlas.pipeline import build_snapshot
from litatlas.textpipe import TokenizerConfig
from litatlas.tsne import TsneConfig

# word pools per topic so synthetic corpora have real cluster structure
TOPIC_WORDS = {
    0: ["tumor", "oncology", "carcinoma", "metastasis", "chemotherapy", "biopsy",
        "lesion", "melanoma", "radiotherapy", "oncogene", "mutation", "malignant"],
    1: ["neuron", "synapse", "cortex", "dopamine", "plasticity", "axon",
        "cognition", "hippocampus", "receptor", "glia", "memory", "stimulus"],
    2: ["qubit", "entanglement", "decoherence", "photon", "superconducting",
        "hamiltonian", "quantum", "annealing", "interferometer", "coherence",
        "lattice", "fermion"],
}
SHARED_WORDS = ["study", "analysis", "results", "method", "patients", "model",
                "experiment", "data", "evidence", "approach", "novel", "observed"]


def synthetic_corpus(n: int, seed: int = 0, n_topics: int = 3) -> list[Document]:
    """Synthetic abstracts drawn from topic word pools plus shared filler."""
    rng = np.random.default_rng(seed)
    docs = []
    for i in range(n):
        topic = i % n_topics
        pool = TOPIC_WORDS[topic % 3] + SHARED_WORDS
        words = rng.choice(pool, size=int(rng.integers(25, 60)))
        docs.append(
            Document(
                doc_id=f"custom:{i:04d}",
                source="custom",
                title=f"Synthetic paper {i}",
                abstract_text=" ".join(words),
                authors=(f"Author {i % 7}",),
                venue=f"Journal {topic}",
                published_year=2000 + (i % 20),
                url=f"https://example.org/{i}",
            )
        )
    return docs


def fast_config(**overrides) -> PipelineConfig:
    """Small, quick pipeline config for fixture snapshots."""
    defaults = dict(
        tokenizer=TokenizerConfig(min_document_frequency=1),
        lsa_components=6,
        tsne=TsneConfig(perplexity=4, n_iterations=80, early_exaggeration_iters=20,
                        momentum_switch_iter=20),
        k_neighbors=5,
    )
    defaults.update(overrides)
    return PipelineConfig(**defaults)


@pytest.fixture(scope="session")
def corpus12():
    return synthetic_corpus(12, seed=7)


@pytest.fixture(scope="session")
def snapshot12(corpus12):
    return build_snapshot(corpus12, fast_config(), corpus_version=1)


@pytest.fixture()
def snapshot_dir(tmp_path, snapshot12):
    from litatlas.store import save_snapshot

    path = tmp_path / "snapshot"
    save_snapshot(snapshot12, path)
    return path
