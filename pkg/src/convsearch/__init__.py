"""Conversational passage search: topic-aware utterance rewriting, Dirichlet
query-likelihood retrieval with RM3 feedback, pluggable re-ranking, and
TREC-style evaluation."""

from .textpipe import AnalyzerConfig, Token, analyze, tokenize
from .index import Index, Posting, build_index
from .retrieval import (
    EmptyQueryError,
    PrfParams,
    QueryModel,
    RankedList,
    RetrievalParams,
    kl_search,
    ql_score,
    rm3_expand,
    search,
)
from .rewriting import (
    Annotation,
    Conversation,
    RewriteState,
    Turn,
    annotate,
    detect_topic_shift,
    first_topic,
    propagate,
    rewrite_conversation,
)
from .rerank import (
    Candidate,
    CandidateSet,
    RerankParams,
    SidecarClient,
    make_candidates,
    rerank_external,
    rerank_lexical,
)
from .evaluation import Judgments, MetricReport, compute, parse_qrels, parse_run
from .pipeline import PipelineConfig, run_pipeline

__version__ = "0.1.0"
