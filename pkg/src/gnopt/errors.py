"""Exception types shared across the solver stack."""


class CapabilityError(RuntimeError):
    """An oracle or operation was asked for a derivative order it does not support."""


class EvaluationError(RuntimeError):
    """A non-finite value turned up while evaluating an oracle."""


class SubproblemError(RuntimeError):
    """The regularized-model subproblem solver did not reach its tolerance.

    Carries the best iterate found so far in ``best`` (a TensorStepResult).
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class LineSearchError(RuntimeError):
    """The step-scale search exhausted its budget without satisfying the
    acceptance window.  Usually means degenerate geometry or a wrong
    smoothness constant.  Carries the partial iteration trace in ``trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ScheduleError(RuntimeError):
    """A restart-schedule power expression overflowed."""


class GuaranteeViolation(RuntimeError):
    """A restart run returned a point whose gradient norm exceeds the target.

    Signals a wrong initial bound (delta0 / R) or smoothness constant.
    Diagnostics are attached in ``run`` (a RestartRun).
    """

    def __init__(self, message, run=None):
        super().__init__(message)
        self.run = run
