class NonLatticeStateError(ValueError):
    """An instance state is not a product of Bell states"""


class NonWeylStateError(ValueError):
    """An instance state is not a generalized Bell state"""


class MalformedCertificateError(ValueError):
    """A dual certificate does not fit the instance it is checked against"""


class NotDyadicError(ValueError):
    """Floating data cannot be lifted to small dyadic rationals"""


class MeasurementSizeError(ValueError):
    """A measurement has the wrong number of operators for the instance"""


class DualityChainError(ArithmeticError):
    """Verified values violate α ≤ β ≤ β′"""

    def __init__(self, msg: str, values: dict[str, float]) -> None:
        super().__init__(msg)
        self.values = values


class VerificationError(ArithmeticError):
    """A measurement or certificate read back from the solver fails its independent check"""

    def __init__(self, msg: str, failures: dict[str, list[str]]) -> None:
        super().__init__(msg)
        self.failures = failures
