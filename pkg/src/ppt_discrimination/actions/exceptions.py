class InvalidStateSetFile(ValueError):
    """A state set file cannot be loaded or does not describe valid states"""


class InvalidCertificateFile(ValueError):
    """A certificate or report file cannot be loaded"""
