"""Exact stability verdicts for weighted configurations of linear subspaces.

The core question: given subspaces K_1, ..., K_m of V tensor W with
positive rational weights, is the configuration unstable, strictly
semistable, stable, or polystable for the induced group action on V?
Verdicts come with exact certificates; a numeric moment-map solver
corroborates them and suggests destabilizers on divergence.
"""

from .balance import (
    BalanceResult,
    HermitianMetric,
    MomentValue,
    NoGapError,
    SampledBundleConfig,
    SolveStatus,
    balance_solve,
    bundle_balance_solve,
    bundle_moment_map,
    extract_destabilizer,
    kempf_ness_value,
    moment_map,
)
from .cone import (
    ConeSpec,
    MembershipReport,
    NecessaryDirectionReport,
    ProbeReport,
    Region,
    conjecture_probe,
    foth_fixed_plane,
    foth_witness,
    hypersimplex_membership,
    necessary_direction_check,
)
from .config import (
    ConfigSchemaError,
    WeightedConfiguration,
    apply_gl,
    config_from_dict,
    config_to_dict,
    configuration,
    induced_quotient,
    induced_sub,
    intersection_dims,
    merge_items,
    slope_at,
    slope_total,
    split_item,
)
from .corpus import all_cases, corpus_summary, run_corpus
from .filtration import (
    Flag,
    GradedStep,
    MFiltration,
    RefinementObstruction,
    hn_filtration,
    jh_filtration,
    mfiltration,
    mfiltration_to_config,
    polystable_split,
    tensor_filtrations,
)
from .gm import (
    BlockDegenerateError,
    OrbitEquivalence,
    OrbitStatus,
    PackedPoint,
    PackedPointError,
    gale_transform,
    gm_backward,
    gm_forward,
    orbit_equivalent,
)
from .linalg import (
    DimensionMismatchError,
    RationalMatrix,
    Subspace,
    canonicalize,
    format_rational,
    full_subspace,
    join,
    kernel,
    meet,
    parse_rational,
    span,
    zero_subspace,
)
from .stability import (
    Confidence,
    DominantWeightReport,
    InternalSoundnessError,
    OnePS,
    Status,
    Verdict,
    adapted_frame,
    candidate_subspaces,
    decide,
    dominant_weight_check,
    exactify_destabilizer,
    lambda_for_subspace,
    mu_general,
    mu_lambda_s,
)

__version__ = "0.1.0"

__all__ = [
    "BalanceResult",
    "BlockDegenerateError",
    "ConeSpec",
    "Confidence",
    "ConfigSchemaError",
    "DimensionMismatchError",
    "DominantWeightReport",
    "Flag",
    "GradedStep",
    "HermitianMetric",
    "InternalSoundnessError",
    "MFiltration",
    "MembershipReport",
    "MomentValue",
    "NecessaryDirectionReport",
    "NoGapError",
    "OnePS",
    "OrbitEquivalence",
    "OrbitStatus",
    "PackedPoint",
    "PackedPointError",
    "ProbeReport",
    "RationalMatrix",
    "RefinementObstruction",
    "Region",
    "SampledBundleConfig",
    "SolveStatus",
    "Status",
    "Subspace",
    "Verdict",
    "WeightedConfiguration",
    "adapted_frame",
    "all_cases",
    "apply_gl",
    "balance_solve",
    "bundle_balance_solve",
    "bundle_moment_map",
    "candidate_subspaces",
    "canonicalize",
    "config_from_dict",
    "config_to_dict",
    "configuration",
    "conjecture_probe",
    "corpus_summary",
    "decide",
    "dominant_weight_check",
    "exactify_destabilizer",
    "extract_destabilizer",
    "format_rational",
    "foth_fixed_plane",
    "foth_witness",
    "full_subspace",
    "gale_transform",
    "gm_backward",
    "gm_forward",
    "hn_filtration",
    "hypersimplex_membership",
    "induced_quotient",
    "induced_sub",
    "intersection_dims",
    "jh_filtration",
    "join",
    "kempf_ness_value",
    "kernel",
    "lambda_for_subspace",
    "meet",
    "merge_items",
    "mfiltration",
    "mfiltration_to_config",
    "moment_map",
    "mu_general",
    "mu_lambda_s",
    "necessary_direction_check",
    "orbit_equivalent",
    "parse_rational",
    "polystable_split",
    "run_corpus",
    "slope_at",
    "slope_total",
    "span",
    "split_item",
    "tensor_filtrations",
    "zero_subspace",
    "__version__",
]
