"""Keyword search, whole-abstract search and the rating feedback loop.

A keyword query and a pasted abstract go through the same inverted
index; marking papers relevant then pools their graph neighbors into
personalized recommendations, scored by the best similarity any relevant
paper assigns them.
"""
import numpy as np

from litatlas import (
    Document,
    PipelineConfig,
    TokenizerConfig,
    TsneConfig,
    UserProfile,
    build_snapshot,
    rate,
    recommend,
    search_text,
)

rng = np.random.default_rng(1)
fields = ["genomic", "screening", "cohort", "biomarker", "assay", "sequencing",
          "variant", "expression", "pathway", "regulation", "clinical", "trial",
          "prognosis", "phenotype", "transcriptome", "methylation", "somatic",
          "germline", "panel", "enrichment", "stratification", "endpoint",
          "recurrence", "survival", "histology", "immunoassay", "titration",
          "replication", "annotation", "validation"]
docs = [
    Document(
        doc_id=f"custom:{i:03d}", source="custom", title=f"Paper {i}",
        abstract_text=" ".join(rng.choice(fields, size=30)),
        venue="demo", published_year=2020,
    )
    for i in range(40)
]
snapshot = build_snapshot(docs, PipelineConfig(
    tokenizer=TokenizerConfig(min_document_frequency=2),
    lsa_components=10,
    tsne=TsneConfig(perplexity=8, n_iterations=300),
    k_neighbors=10,
))

print("keyword search: 'biomarker sequencing'")
result = search_text(snapshot.inverted_index, snapshot.vocabulary,
                     "biomarker sequencing", limit=5)
for doc_id, score in result.ranked:
    print(f"  {score:5.3f}  {doc_id}")

print("\nwhole-abstract search (a stored abstract finds itself first):")
result = search_text(snapshot.inverted_index, snapshot.vocabulary,
                     docs[5].abstract_text, limit=3)
for doc_id, score in result.ranked:
    print(f"  {score:5.3f}  {doc_id}")

print("\nrating loop:")
profile = UserProfile(user_id="demo-user")
profile = rate(profile, docs[5].doc_id, "relevant")
profile = rate(profile, docs[11].doc_id, "relevant")
suggestions = recommend(profile, snapshot.similarity_graph, n=5)
print("after two relevant marks:")
for doc_id, score in suggestions:
    print(f"  {score:5.3f}  {doc_id}")

# disliking the top suggestion removes exactly it
profile = rate(profile, suggestions[0][0], "irrelevant")
print(f"after marking {suggestions[0][0]} irrelevant:")
for doc_id, score in recommend(profile, snapshot.similarity_graph, n=5):
    print(f"  {score:5.3f}  {doc_id}")
