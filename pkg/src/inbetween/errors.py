"""Exception types raised across the package."""


class InbetweenError(Exception):
    """Base class for all package errors."""


class DegenerateRotation(InbetweenError):
    pass


class InvalidRotation(InbetweenError):
    pass


class SkeletonMismatch(InbetweenError):
    pass


class SignalTooShort(InbetweenError):
    pass


class InvalidSpeed(InbetweenError):
    pass


class ShapeError(InbetweenError):
    pass


class NonScalarLoss(InbetweenError):
    pass


class ContainerError(InbetweenError):
    pass


class ParseError(InbetweenError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RetargetError(InbetweenError):
    pass


class ResampleError(InbetweenError):
    pass


class MirrorError(InbetweenError):
    pass


class SplitError(InbetweenError):
    pass


class ParameterError(InbetweenError):
    pass


class InvalidAmplitude(InbetweenError):
    pass


class EmptyDataset(InbetweenError):
    pass


class MissingLabels(InbetweenError):
    pass


class MissingPhase(InbetweenError):
    pass


class TrainingDiverged(InbetweenError):
    """Raised when a loss turns NaN/inf; carries the step and component losses."""

    def __init__(self, step, components):
        self.step = step
        self.components = dict(components)
        parts = ", ".join(f"{k}={v:.6g}" for k, v in self.components.items())
        super().__init__(f"non-finite loss at step {step}: {parts}")


class StyleClipTooShort(InbetweenError):
    pass


class ConfigError(InbetweenError):
    pass


class StateError(InbetweenError):
    pass


class CheckpointError(InbetweenError):
    pass


class InsufficientSamples(InbetweenError):
    pass


class DurationError(InbetweenError):
    pass


class InsufficientRepetitions(InbetweenError):
    pass


class MissingPrerequisite(InbetweenError):
    """A pipeline stage was run before the stage it depends on."""

    def __init__(self, stage, path):
        self.stage = stage
        self.path = path
        super().__init__(f"missing {stage} output: {path} (run the {stage} stage first)")
