"""The REST surface, exercised in-process.

Builds a snapshot into ./demo-data and walks the API the browser UI
uses: the map payload, article detail with similar papers, abstract
search, ratings and recommendations. To serve the same snapshot over
the network instead:

    litatlas serve --snapshot demo-data/snapshot --bind 127.0.0.1:8000
"""
import numpy as np
from fastapi.testclient import TestClient

from litatlas import Document, PipelineConfig, TokenizerConfig, TsneConfig, build_snapshot
from litatlas.service import create_app
from litatlas.store import save_snapshot

rng = np.random.default_rng(2)
words = ["protein", "folding", "structure", "binding", "kinase", "substrate",
         "crystal", "domain", "mutation", "stability", "ligand", "complex",
         "residue", "helix", "sheet", "conformation", "dynamics", "affinity",
         "interface", "allosteric", "dimer", "catalysis", "inhibitor", "docking",
         "spectroscopy", "thermodynamics", "unfolding", "aggregation", "chaperone",
         "solvent", "hydrophobic", "electrostatic", "simulation", "ensemble"]
docs = [
    Document(
        doc_id=f"custom:{i:03d}", source="custom", title=f"Structure paper {i}",
        abstract_text=" ".join(rng.choice(words, size=45)),
        venue="demo", published_year=2018 + i % 6,
    )
    for i in range(25)
]
snapshot = build_snapshot(docs, PipelineConfig(
    tokenizer=TokenizerConfig(min_document_frequency=2),
    lsa_components=8,
    tsne=TsneConfig(perplexity=8, n_iterations=300),
    k_neighbors=8,
))
save_snapshot(snapshot, "demo-data/snapshot")
print("snapshot written to demo-data/snapshot")

app = create_app("demo-data/snapshot", state_dir="demo-data")
client = TestClient(app)

health = client.get("/api/health").json()
print(f"\nGET /api/health -> version {health['corpus_version']}, "
      f"{health['n_documents']} documents")

rows = client.get("/api/map").json()
print(f"GET /api/map -> {len(rows)} points, first: {rows[0]['doc_id']} "
      f"at ({rows[0]['x']:.2f}, {rows[0]['y']:.2f})")

detail = client.get(f"/api/papers/{docs[0].doc_id}").json()
print(f"GET /api/papers/{docs[0].doc_id} -> {len(detail['similar'])} similar articles")

found = client.post("/api/search", json={"text": docs[3].abstract_text, "limit": 3}).json()
print(f"POST /api/search (own abstract) -> top hit {found['results'][0]['doc_id']} "
      f"at score {found['results'][0]['score']:.3f}")

client.post(f"/api/papers/{docs[0].doc_id}/rating", json={"verdict": "relevant"})
recs = client.get("/api/recommendations").json()["recommendations"]
print(f"after one relevant rating -> {len(recs)} recommendations, "
      f"best {recs[0]['doc_id']} at {recs[0]['score']:.3f}")
