"""Exception hierarchy shared across the package."""


class SceneDiffError(Exception):
    """Base class for all scenediff errors."""


class SceneParseError(SceneDiffError):
    """Malformed scene, task, or config input."""


class GenerationError(SceneDiffError):
    """Simulator could not place a valid sample within the retry budget."""


class PluginError(SceneDiffError):
    """Classifier plugin transport failure (spawn, crash, timeout)."""


class PluginProtocolError(PluginError):
    """Plugin spoke, but not according to the wire protocol."""
