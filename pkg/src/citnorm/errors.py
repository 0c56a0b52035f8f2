"""Exception types shared across the package."""


class DataError(Exception):
    """Invalid input data or configuration; maps to CLI exit code 1."""
