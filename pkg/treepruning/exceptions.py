class TreePruningException(Exception):
    """
    Base exception
    """


class InvalidCode(TreePruningException):
    """
    Invalid parity-check matrix or code parameters
    """


class AlistFormatError(InvalidCode):
    """
    Malformed alist file, reported with the offending (1-indexed) line
    """

    def __init__(self, line, message):
        self.line = line
        self.message = message
        super(AlistFormatError, self).__init__('line %d: %s' % (line, message))

    def __reduce__(self):
        return self.__class__, (self.line, self.message)


class InvalidChannel(TreePruningException):
    """
    Invalid channel specification or channel symbol
    """


class InvalidScheme(TreePruningException):
    """
    Truncation scheme that cannot be applied to the instance
    """


class InvalidWalk(TreePruningException):
    """
    Walk that does not close a loop where a terminated node was expected
    """


class NodeBudgetExceeded(TreePruningException):
    """
    Self-avoiding-walk tree grew past the configured node budget
    """


class SizeCapExceeded(TreePruningException):
    """
    Brute force oracle asked to enumerate beyond its cap
    """


class DecodingError(TreePruningException):
    """
    Received word inconsistent with the code
    """


class TreeArithmeticError(DecodingError):
    """
    Numerical invariant of the tree recursion violated
    """


class ConfigError(TreePruningException):
    """
    Invalid configuration file or command line value
    """


class TrialError(TreePruningException):
    """
    Decoder failure inside a Monte Carlo trial
    """

    def __init__(self, noise, trial, decoder, cause):
        self.noise = noise
        self.trial = trial
        self.decoder = decoder
        self.cause = str(cause)
        super(TrialError, self).__init__(
            'decoder %s failed at noise %s, trial %d: %s' % (decoder, noise, trial, cause))

    def __reduce__(self):
        return self.__class__, (self.noise, self.trial, self.decoder, self.cause)
