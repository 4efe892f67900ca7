"""Issue-link recommendation toolkit.

Given a newly created tracker issue, rank previously created issues by
likelihood of a dependency link: TF-IDF plus distance baselines, a Siamese
CNN matcher over pretrained word vectors, time-window candidate filtering,
and an Accuracy/MRR/Recall@K evaluation harness with a reproducible
experiment grid.
"""

__version__ = "0.1.0"

from .corpus import (
    CorpusError,
    Issue,
    IssueSet,
    LabeledPair,
    chronological_split,
    generate_training_pairs,
    load_issues,
    time_gap_cc,
    time_gap_cu,
)
from .embeddings import EmbeddingTable, EncodedSeq, VectorFormatError, encode, load_vectors
from .features import parse_features, format_features
from .metrics import (
    EvalConfig,
    EvalReport,
    QueryResult,
    accuracy_at_k,
    enumerate_feature_combos,
    evaluate,
    mrr_at_k,
    recall_at_k,
)
from .ranker import (
    BaselineScorer,
    Recommendation,
    SiameseScorer,
    TimeFilter,
    candidates,
    recommend,
)
from .siamese import (
    PairBatch,
    SiameseConfig,
    SiameseModel,
    TrainingDiverged,
    conv1d,
    gradient_check,
    make_encoder,
    train,
)
from .textprep import concat_fields, preprocess
from .tfidf import SparseVec, TfidfModel, distance, fit_tfidf, vectorize

__all__ = [
    "__version__",
    "BaselineScorer",
    "CorpusError",
    "EmbeddingTable",
    "EncodedSeq",
    "EvalConfig",
    "EvalReport",
    "Issue",
    "IssueSet",
    "LabeledPair",
    "PairBatch",
    "QueryResult",
    "Recommendation",
    "SiameseConfig",
    "SiameseModel",
    "SiameseScorer",
    "SparseVec",
    "TfidfModel",
    "TimeFilter",
    "TrainingDiverged",
    "VectorFormatError",
    "accuracy_at_k",
    "candidates",
    "chronological_split",
    "concat_fields",
    "conv1d",
    "distance",
    "encode",
    "enumerate_feature_combos",
    "evaluate",
    "fit_tfidf",
    "format_features",
    "generate_training_pairs",
    "gradient_check",
    "load_issues",
    "load_vectors",
    "make_encoder",
    "mrr_at_k",
    "parse_features",
    "preprocess",
    "recall_at_k",
    "recommend",
    "time_gap_cc",
    "time_gap_cu",
    "train",
    "vectorize",
]
