"""Numerical atlas for finite-dimensional quantum channels.

Image geometry (support functions, vertex detection, polytopic
decomposition), classification (CQ, eCQ, entanglement breaking, universal
image additivity), output-entropy minimization and additivity diagnostics,
and fixed-point structure, with a JSON spec format and a CLI front end.
"""

__version__ = "0.1.0"

from .channels import (
    Channel,
    ChoiForm,
    CptpVerdict,
    CqForm,
    DirectSumForm,
    EcqForm,
    KrausForm,
    NotCptpError,
    PovmForm,
    choi_channel,
    compose,
    conjugate,
    constant_channel,
    cq_channel,
    dephasing_channel,
    depolarizing_channel,
    direct_sum,
    ecq_channel,
    identity_channel,
    kraus_channel,
    linear_map_channel,
    map_distance,
    povm_channel,
    tensor,
    trine_channel,
    unital_qubit_diag,
)
from .classify import (
    ClassVerdict,
    EcqCertificate,
    EcqReconstruction,
    eb_direct_sum_consistency,
    is_cq,
    is_entanglement_breaking,
    is_universally_image_additive,
    reconstruct_ecq,
    retraction_channel,
)
from .entropy import (
    ContainmentError,
    build_hiding_channel,
    entropy_additivity_gap,
    image_additivity_gap,
    min_output_entropy,
    renyi_entropy,
)
from .fixed_points import (
    FixedPointError,
    FixedPointStructure,
    cesaro_projection,
    fixed_point_structure,
    transfer_matrix,
    verify_eb_fixed_point_theorem,
)
from .formats import (
    SpecFormatError,
    channel_from_dict,
    channel_to_dict,
    load_channel,
)
from .geometry import (
    PolytopicDecomposition,
    VertexRecord,
    dimension_bound_check,
    find_vertices,
    fujiwara_algoet_check,
    image_boundary_2d,
    polytopic_decompose,
    support_function,
)
from .pipeline import run_pipeline, validate_report

__all__ = [
    "Channel",
    "ChoiForm",
    "ClassVerdict",
    "ContainmentError",
    "CptpVerdict",
    "CqForm",
    "DirectSumForm",
    "EcqCertificate",
    "EcqForm",
    "EcqReconstruction",
    "FixedPointError",
    "FixedPointStructure",
    "KrausForm",
    "NotCptpError",
    "PolytopicDecomposition",
    "PovmForm",
    "SpecFormatError",
    "VertexRecord",
    "build_hiding_channel",
    "cesaro_projection",
    "channel_from_dict",
    "channel_to_dict",
    "choi_channel",
    "compose",
    "conjugate",
    "constant_channel",
    "cq_channel",
    "dephasing_channel",
    "depolarizing_channel",
    "dimension_bound_check",
    "direct_sum",
    "eb_direct_sum_consistency",
    "ecq_channel",
    "entropy_additivity_gap",
    "find_vertices",
    "fixed_point_structure",
    "fujiwara_algoet_check",
    "identity_channel",
    "image_additivity_gap",
    "image_boundary_2d",
    "is_cq",
    "is_entanglement_breaking",
    "is_universally_image_additive",
    "kraus_channel",
    "linear_map_channel",
    "load_channel",
    "map_distance",
    "min_output_entropy",
    "polytopic_decompose",
    "povm_channel",
    "reconstruct_ecq",
    "renyi_entropy",
    "retraction_channel",
    "run_pipeline",
    "support_function",
    "tensor",
    "transfer_matrix",
    "trine_channel",
    "unital_qubit_diag",
    "validate_report",
    "verify_eb_fixed_point_theorem",
    "__version__",
]
