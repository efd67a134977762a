"""Exception types shared across the package."""


class HsifError(ValueError):
    """Base class for all input/contract violations raised by this package."""


class CsvFormatError(HsifError):
    """A CSV input violated its contract (header, row shape, or cell value)."""


class WindowError(HsifError):
    """An indicator window length is out of range for its input series."""


class CatalogError(HsifError):
    """A feature-catalog file or entry could not be parsed or computed."""


class FusionError(HsifError):
    """Frames or datasets could not be combined, scaled, windowed, or split."""


class ModelError(HsifError):
    """Network construction, forward/backward, or training failed a contract."""


class CheckpointError(HsifError):
    """A model checkpoint is unreadable, version-mismatched, or shape-mismatched."""


class ConfigError(HsifError):
    """A pipeline configuration value is missing, malformed, or out of range."""


class PrerequisiteError(HsifError):
    """A pipeline stage was invoked before the stage it depends on."""
