class ModelError(ValueError):
    """A numerically degenerate instance: effort-cost bound c > lambda breached, empty transform, undefined flip."""


class FlipUndefined(ModelError):
    pass
