"""Exact and simulated first returns of lattice random walks, and irreducible composition pairs."""
from .compositions import (
    CountTable,
    brute_force_irreducible,
    irreducible_counts1,
    irreducible_counts2,
    irreducible_probability,
    total_pairs1,
    total_pairs2,
)
from .errors import (
    DomainError,
    FirstReturnError,
    HypothesisError,
    ResourceError,
    SingularityError,
    ValidationError,
)
from .laws import StepSpec, load_law, named_law, validate_step
from .walk import charfun_return, killed_table, regularity_check, return_table, step_power

__version__ = "0.1.0"

__all__ = [
    "CountTable",
    "brute_force_irreducible",
    "irreducible_counts1",
    "irreducible_counts2",
    "irreducible_probability",
    "total_pairs1",
    "total_pairs2",
    "DomainError",
    "FirstReturnError",
    "HypothesisError",
    "ResourceError",
    "SingularityError",
    "ValidationError",
    "StepSpec",
    "load_law",
    "named_law",
    "validate_step",
    "charfun_return",
    "killed_table",
    "regularity_check",
    "return_table",
    "step_power",
]
