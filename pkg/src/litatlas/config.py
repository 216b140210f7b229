"""Build configuration shared by the CLI, the pipeline and snapshots."""
from __future__ import annotations

from dataclasses import dataclass, field

from .ingest import SourceQuery
from .textpipe import TokenizerConfig
from .tsne import TsneConfig


@dataclass(frozen=True)
class PipelineConfig:
    tokenizer: TokenizerConfig = field(default_factory=TokenizerConfig)
    lsa_components: int = 150
    tsne: TsneConfig = field(default_factory=TsneConfig)
    k_neighbors: int = 20
    source_queries: tuple[SourceQuery, ...] = ()
    lsa_seed: int = 0

    def __post_init__(self):
        if self.lsa_components < 1:
            raise ValueError("lsa_components must be >= 1")
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        object.__setattr__(self, "source_queries", tuple(self.source_queries))

    def to_json(self) -> dict:
        return {
            "tokenizer": self.tokenizer.to_json(),
            "lsa_components": self.lsa_components,
            "tsne": self.tsne.to_json(),
            "k_neighbors": self.k_neighbors,
            "source_queries": [q.to_json() for q in self.source_queries],
            "lsa_seed": self.lsa_seed,
        }

    @classmethod
    def from_json(cls, record: dict) -> "PipelineConfig":
        return cls(
            tokenizer=TokenizerConfig.from_json(record["tokenizer"])
            if "tokenizer" in record
            else TokenizerConfig(),
            lsa_components=record.get("lsa_components", 150),
            tsne=TsneConfig.from_json(record["tsne"]) if "tsne" in record else TsneConfig(),
            k_neighbors=record.get("k_neighbors", 20),
            source_queries=tuple(
                SourceQuery.from_json(q) for q in record.get("source_queries", [])
            ),
            lsa_seed=record.get("lsa_seed", 0),
        )
