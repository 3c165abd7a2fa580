"""Multistate Markov chains as toric statistical models.

The package realizes a discrete-time Markov chain with forbidden
transitions and absorbing states as a monomially parametrized family of
path distributions: enumerate the admissible paths, build the integer
design matrix of sufficient statistics, generate and verify binomial
relations that vanish on the model, and compute closed-form maximum
likelihood estimates from trajectory or count data.  All model-facing
arithmetic is exact rational; floats appear only in rounded views.
"""

from .errors import (
    EstimationError,
    InadmissiblePathError,
    ModelError,
    ParameterError,
    ParseError,
    RelationError,
    SpecificationError,
)
from .estimate import (
    CountVector,
    EstimateReport,
    Recovery,
    TrajectorySet,
    birch_residual,
    counts_from_trajectories,
    fitted_path_probabilities,
    loglikelihood,
    mle_homogeneous,
    mle_nonhomogeneous,
    mle_paths_hierarchical,
    recover_parameters,
)
from .iofiles import (
    CollapseMap,
    CorpusSpec,
    collapse_states,
    corpus_to_trajectories,
    decimal_string,
    fraction_string,
    ingest_trajectories,
    letters_alphabet,
    parse_model_spec,
    read_collapse_map,
    read_corpus_spec,
    read_counts,
    read_probabilities,
    read_relations,
    tokenize_corpus,
    write_counts,
    write_probabilities,
    write_relations,
    write_trajectories,
)
from .model import (
    ModelSpec,
    ParameterPoint,
    as_fraction,
    format_symbol,
    path_probability,
    path_probability_extended,
    symbolic_path_monomial,
    uniform_parameters,
    validate_model,
    validate_parameters,
)
from .paths import (
    DesignMatrix,
    PathTable,
    block_counts,
    build_design_matrix,
    enumerate_paths,
)
from .relations import (
    Binomial,
    RelationSet,
    canonicalize,
    generators_for,
    homogeneous_family,
    nonhomogeneous_generators,
    permutation_linear_relations,
    slice_linear_generators,
)
from .verify import (
    VerificationReport,
    kernel_membership,
    sample_parameters,
    vanishes_on_model,
    verify_relation_set,
)

__version__ = "0.1.0"

__all__ = [
    "Binomial",
    "CollapseMap",
    "CorpusSpec",
    "CountVector",
    "DesignMatrix",
    "EstimateReport",
    "EstimationError",
    "InadmissiblePathError",
    "ModelError",
    "ModelSpec",
    "ParameterError",
    "ParameterPoint",
    "ParseError",
    "PathTable",
    "Recovery",
    "RelationError",
    "RelationSet",
    "SpecificationError",
    "TrajectorySet",
    "VerificationReport",
    "as_fraction",
    "birch_residual",
    "block_counts",
    "build_design_matrix",
    "canonicalize",
    "collapse_states",
    "corpus_to_trajectories",
    "counts_from_trajectories",
    "decimal_string",
    "enumerate_paths",
    "fitted_path_probabilities",
    "format_symbol",
    "fraction_string",
    "generators_for",
    "homogeneous_family",
    "ingest_trajectories",
    "kernel_membership",
    "letters_alphabet",
    "loglikelihood",
    "mle_homogeneous",
    "mle_nonhomogeneous",
    "mle_paths_hierarchical",
    "nonhomogeneous_generators",
    "parse_model_spec",
    "path_probability",
    "path_probability_extended",
    "permutation_linear_relations",
    "read_collapse_map",
    "read_corpus_spec",
    "read_counts",
    "read_probabilities",
    "read_relations",
    "recover_parameters",
    "sample_parameters",
    "slice_linear_generators",
    "symbolic_path_monomial",
    "tokenize_corpus",
    "uniform_parameters",
    "validate_model",
    "validate_parameters",
    "vanishes_on_model",
    "verify_relation_set",
    "write_counts",
    "write_probabilities",
    "write_relations",
    "write_trajectories",
]
