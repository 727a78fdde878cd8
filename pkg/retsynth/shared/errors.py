"""contains the typed errors raised across retsynth

All errors derive from ValueError so callers that only care about "bad input"
can keep catching ValueError.
"""


class RetsynthError(ValueError):
    """base class for every error raised deliberately by retsynth"""


class DimensionError(RetsynthError):
    """shapes do not compose"""


class ConfigurationError(RetsynthError):
    """a configuration value, builder argument or CLI option is invalid"""


class NumericError(RetsynthError):
    """a value became non-finite or an iteration failed to converge"""


class ContractError(RetsynthError):
    """a documented precondition of an operation does not hold"""


class LabelError(RetsynthError):
    """a class label or index is unknown"""


class DegenerateInputError(RetsynthError):
    """input carries too few samples for the requested statistic"""


class FormatError(RetsynthError):
    """an image file is malformed

    Args:
        message (str): description of the problem
        offset (int): byte offset in the file where parsing failed
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset
        self.detail = message


class CheckpointError(RetsynthError):
    """a checkpoint could not be loaded; nothing was modified"""


class TapLookupError(RetsynthError, KeyError):
    """a requested feature tap does not exist in the network"""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class UsageError(RetsynthError):
    """the command line could not be parsed"""


class TrainingAborted(NumericError):
    """training produced a non-finite loss

    Args:
        step (int): step (or epoch) index at which the loss became non-finite
        losses (dict): the loss values observed at that step
    """

    def __init__(self, step, losses):
        formatted = ", ".join(f"{name}={value}" for name, value in losses.items())
        super().__init__(f"training aborted at step {step}: non-finite loss ({formatted})")
        self.step = step
        self.losses = dict(losses)
