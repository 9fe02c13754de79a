"""Distance-based non-Markovianity of qubit dynamical maps."""
from .bounds import (
    BoundReport,
    CollisionFamily,
    CollisionModel,
    eps_separable_membership,
    run_collision_model,
    separable_diameter,
    verify_bound,
)
from .channels import (
    AmplitudeDampingFamily,
    ChannelSnapshot,
    PhaseDampingFamily,
    ad_decay_rate,
    ad_decoherence_function,
    ad_dilation,
    ad_snapshot,
    is_divisible,
    pd_dephasing_rate,
    pd_dilation,
    pd_snapshot,
)
from .measures import (
    CandidateSet,
    MeasureResult,
    cjks_measure,
    divisible_candidates,
    max_distance_measure,
    measure_curve,
    min_distance_measure,
)
from .quantum import (
    DensityMatrix,
    PureState,
    apply_kraus,
    partial_trace,
    quantum_mutual_information,
    relative_entropy,
    trace_distance,
    von_neumann_entropy,
)
from .errors import ConfigurationError, ContractError, FreshQubitsExhausted, InvalidChannelError, PoleError
from .sampling import SampleConfig, haar_pure_state, induced_density_matrix

__version__ = "0.1.0"
