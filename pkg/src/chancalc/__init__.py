"""chancalc: numerical calculus for finite-dimensional quantum channels.

Dilations, complementary channels, cb/diamond-norm distances with
certificates, operational channel fidelity, dilation continuity bounds,
and the information-disturbance tradeoff, plus a CLI with experiment
presets. Everything is dense numpy at desk scale.
"""

__version__ = "0.1.0"

from .errors import (
    BadParameters,
    ChancalcError,
    DegenerateConstraints,
    DimensionMismatch,
    InvalidState,
    NotAFactorization,
    NotCP,
    NotCPTP,
    NotHermitian,
    NotHermiticityPreserving,
    NotSameChannel,
    NumericalFailure,
    ShrinkNotAllowed,
)
from .rng import RngStream
from .linalg import (
    DensityMatrix,
    PureState,
    haar_state,
    haar_unitary,
    operator_norm,
    partial_trace,
    polar,
    psd_sqrt,
    purify,
    schatten_norm,
    state_fidelity,
    tensor,
    trace_norm,
)
from .channels import (
    Channel,
    Ensemble,
    LinearMap,
    StinespringDilation,
    antisym_projector,
    as_channel,
    choi_to_kraus,
    complementary,
    connecting_isometry,
    depolarizing,
    flip,
    from_kraus,
    identity_channel,
    identity_map,
    jamiolkowski_state,
    make_named,
    pad_dilation,
    random_channel,
    random_unitary_mix,
    swap_output_env,
    sym_projector,
    t_family,
    to_stinespring,
    transpose_map,
    unitary_channel,
    werner_eigenvalues,
)
from .sdp import SdpProblem, SdpSolution, hermitian_basis
from .sdp import solve as solve_sdp
from .metrics import (
    DistanceResult,
    align_dilations,
    channel_fidelity,
    channel_fidelity_Fc,
    coherent_info,
    diamond_norm,
    diamond_program,
    holevo_chi,
    induced_distance,
    stabilized_input,
    stabilized_output,
    von_neumann_entropy,
)
from .continuity import ContinuityReport, isometry_gap, verify_continuity
from .tradeoff import (
    TradeoffReport,
    construct_decoder,
    no_broadcast_check,
    verify_tradeoff,
)
from .serialize import (
    channel_from_dict,
    channel_to_dict,
    load_channel,
    save_channel,
)
from .experiments import (
    ExperimentReport,
    experiment_randomizing,
    experiment_separation,
    experiment_sweep,
    randomizing_witness,
)
