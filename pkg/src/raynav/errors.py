"""Exception types shared across the toolkit."""


class RaynavError(Exception):
    """Base class for all toolkit errors."""


class UsageError(RaynavError):
    """Bad arguments or configuration; maps to CLI exit code 2."""


class FormatError(RaynavError):
    """Malformed or truncated artifact file."""


class VersionMismatchError(FormatError):
    """Artifact file has an unsupported version tag."""


class SamplingExhaustedError(RaynavError):
    """Rejection sampling ran out of attempts (world too dense or constraint unsatisfiable)."""


class GoalInObstacleError(RaynavError):
    """Requested goal position lies inside an obstacle (or its dilation)."""


class UnreachableCellError(RaynavError):
    """Field query at a cell the solver never reached."""


class ShapeMismatchError(RaynavError):
    """Tensor shapes inconsistent with the network configuration."""


class TrainingDivergedError(RaynavError):
    """Loss became non-finite during training."""
