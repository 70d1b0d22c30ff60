"""High-order methods for driving the gradient norm of a convex objective below
a target, with restart wrappers, a problem zoo, and a benchmark CLI."""

from .atm import AtmResult, AtmState, IterationRecord, run_atm, search_L
from .errors import (
    CapabilityError,
    EvaluationError,
    GuaranteeViolation,
    LineSearchError,
    ScheduleError,
    SubproblemError,
)
from .oracles import (
    FdReport,
    Oracle,
    RegularizedOracle,
    estimate_lipschitz,
    fd_check,
    make_regularized,
)
from .problems import (
    HardFamilySpec,
    LogisticDataset,
    QuadraticOracle,
    hard_family_problem,
    load_libsvm,
    logistic_problem,
    quadratic_problem,
    synthetic_logistic,
)
from .restarts import (
    RestartRun,
    minimize_gradnorm_from_gap,
    minimize_gradnorm_from_radius,
    schedule_Nk_gap,
    schedule_Nk_radius,
    theoretical_constant_c,
)
from .taylor import (
    TensorStepResult,
    brute_force_tensor_step,
    guaranteed_decrease,
    taylor_model_value,
    tensor_step,
)
from .transport import (
    Certificate,
    TransportInstance,
    TransportPlan,
    certificate,
    ot_dual_problem,
    primal_plan,
    random_transport_instance,
    transport_cost,
)

__version__ = "0.1.0"
