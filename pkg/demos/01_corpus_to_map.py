"""From raw abstracts to a 2-D corpus map.

Builds the full model over a small synthetic corpus: tf-idf vectors,
a 150-component LSA (clamped to corpus size here), the cosine neighbor
graph, and the t-SNE embedding. Writes the map to map.csv and, when
matplotlib is around, a quick scatter to map.png.
"""
import numpy as np

from litatlas import Document, PipelineConfig, TokenizerConfig, TsneConfig, build_snapshot

rng = np.random.default_rng(0)

topics = {
    "oncology": ["tumor", "carcinoma", "metastasis", "chemotherapy", "biopsy",
                 "lesion", "oncogene", "malignant", "remission", "staging"],
    "neuroscience": ["neuron", "synapse", "cortex", "dopamine", "plasticity",
                     "axon", "cognition", "hippocampus", "receptor", "memory"],
    "quantum": ["qubit", "entanglement", "decoherence", "photon", "hamiltonian",
                "superconducting", "annealing", "coherence", "lattice", "fermion"],
}
shared = ["study", "results", "method", "analysis", "data", "model", "novel"]

docs = []
for i in range(60):
    name, words = list(topics.items())[i % 3]
    text = " ".join(rng.choice(words + shared, size=40))
    docs.append(Document(
        doc_id=f"custom:{i:03d}", source="custom",
        title=f"{name.title()} paper {i}", abstract_text=text,
        venue=name, published_year=2010 + i % 12,
    ))

config = PipelineConfig(
    tokenizer=TokenizerConfig(min_document_frequency=2),
    lsa_components=20,
    tsne=TsneConfig(perplexity=10, n_iterations=600),
    k_neighbors=8,
)
snapshot = build_snapshot(docs, config)

print(f"vocabulary: {len(snapshot.vocabulary)} terms")
print(f"final KL divergence: {snapshot.embedding.final_kl:.4f}")

# the neighbor graph drives the "similar articles" panel
first = docs[0]
print(f"\nmost similar to {first.title!r}:")
for neighbor_id, score in snapshot.similarity_graph.neighbors[first.doc_id][:5]:
    neighbor = next(d for d in docs if d.doc_id == neighbor_id)
    print(f"  {score:5.3f}  {neighbor.title}")

with open("map.csv", "w") as fh:
    fh.write("doc_id,x,y,venue\n")
    for doc in docs:
        x, y = snapshot.embedding.coords[doc.doc_id]
        fh.write(f"{doc.doc_id},{x},{y},{doc.venue}\n")
print("\nwrote map.csv")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    colors = {"oncology": "tab:red", "neuroscience": "tab:blue", "quantum": "tab:green"}
    for venue in colors:
        pts = np.array([snapshot.embedding.coords[d.doc_id] for d in docs if d.venue == venue])
        plt.scatter(pts[:, 0], pts[:, 1], c=colors[venue], label=venue, s=18)
    plt.legend()
    plt.title("synthetic corpus map")
    plt.savefig("map.png", dpi=120)
    print("wrote map.png")
except ImportError:
    pass
