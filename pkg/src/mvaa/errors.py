"""Exception hierarchy shared by the whole pipeline.

Two families matter for the CLI exit-code contract: InputError subclasses
(bad files, bad flags, schema problems -> exit 2) and plain PipelineError
subclasses (well-formed input the pipeline cannot process -> exit 3).
"""


class PipelineError(Exception):
    exit_code = 3


class InputError(PipelineError):
    exit_code = 2


# -- input / format errors (exit 2) --------------------------------------

class UnsupportedFormat(InputError):
    pass


class CorruptHeader(InputError):
    pass


class MixedDimensions(InputError):
    pass


class EmptySequence(InputError):
    pass


class MissingFpsSidecar(InputError):
    pass


class SchemaMismatch(InputError):
    pass


class IoFailure(InputError):
    pass


class ConfigError(InputError):
    pass


class UnsmoothedInput(InputError):
    # peak picking on a raw energy signal is a usage error, not a bug
    pass


# -- processing errors (exit 3) -------------------------------------------

class AudioTooShort(PipelineError):
    pass


class EnvelopeTooShort(PipelineError):
    pass


class NoBeatsFound(PipelineError):
    pass


class TooFewFrames(PipelineError):
    pass


class EmptyInput(PipelineError):
    pass


class InstanceTooLarge(PipelineError):
    pass


class NoUsableAnchors(PipelineError):
    pass


class DimensionMismatch(PipelineError):
    pass


class NoBeats(PipelineError):
    pass


class BackendFailed(PipelineError):
    pass


class ContractViolation(PipelineError):
    pass
