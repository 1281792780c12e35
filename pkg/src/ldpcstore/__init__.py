"""LDPC codes for distributed storage: construction, decoding, design and reliability."""

__version__ = "0.1.0"

from .construct import ConstructionSpec, construct, girth, peg_construct, qc_lift
from .ddopt import OptProblem, OptResult, feasible_lambda, optimize_threshold, tradeoff_curve
from .density import DeConfig, de_iterate, decoding_threshold, scaled_threshold
from .graph import (
    DegreeDistribution,
    FactorGraph,
    degree_profile,
    design_rate,
    min_repair_bandwidth,
    read_alist,
    repair_bandwidth,
    write_alist,
)
from .peeling import (
    ToleranceProfile,
    data_loss_probability,
    peel_decode,
    stopping_number_exact,
    tolerance_profile,
)
from .reliability import (
    MarkovSpec,
    StorageSystemParams,
    mttdl_closed_form,
    mttdl_ctmc_oracle,
    mttdl_dominant,
    mttdl_for_graph,
)

__all__ = [
    "ConstructionSpec", "construct", "girth", "peg_construct", "qc_lift",
    "OptProblem", "OptResult", "feasible_lambda", "optimize_threshold", "tradeoff_curve",
    "DeConfig", "de_iterate", "decoding_threshold", "scaled_threshold",
    "DegreeDistribution", "FactorGraph", "degree_profile", "design_rate",
    "min_repair_bandwidth", "read_alist", "repair_bandwidth", "write_alist",
    "ToleranceProfile", "data_loss_probability", "peel_decode", "stopping_number_exact",
    "tolerance_profile", "MarkovSpec", "StorageSystemParams", "mttdl_closed_form",
    "mttdl_ctmc_oracle", "mttdl_dominant", "mttdl_for_graph",
]
