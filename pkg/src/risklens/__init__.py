"""Project similarity and curated-risk recommendation engine.

The package is organized around a batch pipeline: project records are
reduced to key phrases, pooled into unit embedding vectors, ranked by
angular similarity, and the risks tracked in similar projects are mapped
onto a curated risk database by cosine similarity. Precomputed results
are persisted as immutable snapshots and served over a small HTTP API.
A trainable projection head supports fine-tuning experiments on parallel
(raw risk, curated risk) corpora.
"""

__version__ = "0.1.0"
