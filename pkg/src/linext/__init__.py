"""Sequential importance sampling estimates of the number of linear extensions of a poset."""

from .errors import (
    AlreadyDeletedError,
    CycleError,
    DomainError,
    EmptyPosetError,
    InvalidExtensionError,
    NotForestError,
    NotMaximalError,
    PosetParseError,
    SizeLimitError,
)
from .oracle import (
    count_starting_with,
    enumerate_extensions,
    enumerate_labeled_posets,
    exact_count,
    forest_count,
)
from .poset import Poset, load_poset, random_poset, save_poset
from .sis import (
    ASQ,
    DESCENDANTS,
    UNIFORM,
    BatchStats,
    ImportanceSpec,
    LogEstimate,
    lower_bound,
    recursive_estimate,
    run_batch,
    sample_forest_extension_uniform,
    sample_with_forest,
    single_estimate,
)

__version__ = "0.1.0"
