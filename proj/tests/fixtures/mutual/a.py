from b import BETA

ALPHA = BETA


class Klass:
    """Holds a value."""

    def value(self):
        return ALPHA
