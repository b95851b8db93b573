EXIT_FAILURE = 1
EXIT_INVALID_PARAMETER = 2
EXIT_VERIFICATION_FAILED = 3


class VCException(Exception):
    def __init__(self, exit_code: int, reason: str, message: str):
        super().__init__(message)
        self.exit_code = exit_code
        self.reason = reason
        self.message = message

    def __str__(self):
        return f"{self.reason}: {self.message}"


def vc_exception_factory(exit_code: int, reason: str, default_message: str):
    class_name = reason + "Exception"
    return type(
        class_name,
        (VCException,),
        {
            "__init__": lambda self, message=default_message: super(
                self.__class__, self
            ).__init__(exit_code, reason, message)
        },
    )


InvalidParameterException = vc_exception_factory(
    EXIT_INVALID_PARAMETER, "InvalidParameter", "Invalid parameter"
)
InvalidShapeException = vc_exception_factory(
    EXIT_INVALID_PARAMETER,
    "InvalidShape",
    "Vector length must be a power of the tree degree",
)
DegreeBoundException = vc_exception_factory(
    EXIT_INVALID_PARAMETER,
    "DegreeBound",
    "Polynomial degree exceeds the setup degree bound",
)
IndexOutOfRangeException = vc_exception_factory(
    EXIT_INVALID_PARAMETER, "IndexOutOfRange", "Index out of range"
)
DuplicateUpdateException = vc_exception_factory(
    EXIT_INVALID_PARAMETER, "DuplicateUpdate", "Duplicate index in update batch"
)
DimensionMismatchException = vc_exception_factory(
    EXIT_INVALID_PARAMETER, "DimensionMismatch", "Dimension mismatch"
)
MalformedEncodingException = vc_exception_factory(
    EXIT_INVALID_PARAMETER, "MalformedEncoding", "Malformed encoding"
)
VerificationFailedException = vc_exception_factory(
    EXIT_VERIFICATION_FAILED, "VerificationFailed", "Verification failed"
)

