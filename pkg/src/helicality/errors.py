"""Exception hierarchy. Each family carries the CLI exit code it maps to."""


class HelicalityError(Exception):
    exit_code = 1


class ConfigError(HelicalityError):
    exit_code = 2


class DataError(HelicalityError):
    exit_code = 3


class NumericalError(HelicalityError):
    exit_code = 4


class NyquistViolation(ConfigError):
    pass


class UnreadableFile(DataError):
    pass


class UnsupportedEncoding(DataError):
    pass


class EmptyAudio(DataError):
    pass


class AudioTooShort(DataError):
    pass


class DegenerateVariance(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class ZeroVarianceRow(DataError):
    def __init__(self, rows):
        self.rows = [int(r) for r in rows]
        super().__init__(f"zero-variance rows at bin indices {self.rows}")


class DisconnectedGraph(NumericalError):
    def __init__(self, components):
        self.components = [sorted(int(v) for v in c) for c in components]
        sizes = [len(c) for c in self.components]
        super().__init__(f"neighbor graph has {len(sizes)} components of sizes {sizes}")


class InsufficientPositiveEigenvalues(NumericalError):
    pass


class DegenerateHull(NumericalError):
    pass


class NonFiniteObjective(NumericalError):
    pass
