"""veatkit: association and bias quantification for video embedding sets.

Quantifies how strongly concept-labeled sets of pooled video embeddings
associate with attribute sets (differential and single-category tests),
with permutation significance, Cohen's d effect sizes, demographic
correlation, debias-condition comparison, and inter-rater agreement.
"""

__version__ = "0.1.0"

from .analysis import (
    AnnotationRecord,
    ComparisonResult,
    CorrelationResult,
    DemographicRecord,
    classify_effect,
    compare_conditions,
    directionality_coherence,
    fleiss_kappa,
    pearson_r,
)
from .association import (
    AssociationScore,
    PermutationConfig,
    TestResult,
    cosine,
    item_score,
    scveat_effect_size,
    scveat_p_value,
    scveat_statistic,
    scveat_test,
    veat_effect_size,
    veat_p_value,
    veat_statistic,
    veat_test,
)
from .embeddings import (
    ConceptSet,
    FrameSequence,
    VideoEmbedding,
    concept_set,
    group_by_concept,
    pool_frames,
    read_archive,
    sampling_schedule,
    write_archive,
)
from .errors import (
    ArchiveFormatError,
    BatteryConfigError,
    BatteryRunError,
    DegenerateDistributionError,
    DimensionMismatchError,
    InvalidInputError,
    VeatkitError,
    ZeroVectorError,
)
from .oracle import oracle_scveat, oracle_veat

__all__ = [
    "__version__",
    "AnnotationRecord",
    "ArchiveFormatError",
    "AssociationScore",
    "BatteryConfigError",
    "BatteryRunError",
    "ComparisonResult",
    "ConceptSet",
    "CorrelationResult",
    "DegenerateDistributionError",
    "DemographicRecord",
    "DimensionMismatchError",
    "FrameSequence",
    "InvalidInputError",
    "PermutationConfig",
    "TestResult",
    "VeatkitError",
    "VideoEmbedding",
    "ZeroVectorError",
    "classify_effect",
    "compare_conditions",
    "concept_set",
    "cosine",
    "directionality_coherence",
    "fleiss_kappa",
    "group_by_concept",
    "item_score",
    "oracle_scveat",
    "oracle_veat",
    "pearson_r",
    "pool_frames",
    "read_archive",
    "sampling_schedule",
    "scveat_effect_size",
    "scveat_p_value",
    "scveat_statistic",
    "scveat_test",
    "veat_effect_size",
    "veat_p_value",
    "veat_statistic",
    "veat_test",
    "write_archive",
]
