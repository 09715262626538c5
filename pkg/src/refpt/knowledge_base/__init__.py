"""Three-tier penetration-testing knowledge base."""

from .records import (
    IngestReport,
    KnowledgeRecord,
    Perspective,
    Source,
    Tier,
    ingest_records,
    read_records,
    read_source_entries,
    reframe_perspective,
    write_records,
)
from .store import (
    DEFAULT_LAMBDA,
    FORMAT_TAG,
    KnowledgeStore,
    RetrievalResult,
    embed_and_index,
    record_embed_text,
)

__all__ = [
    "Tier", "Source", "Perspective", "KnowledgeRecord", "IngestReport",
    "ingest_records", "reframe_perspective", "read_source_entries",
    "read_records", "write_records",
    "KnowledgeStore", "RetrievalResult", "embed_and_index",
    "record_embed_text", "DEFAULT_LAMBDA", "FORMAT_TAG",
]
