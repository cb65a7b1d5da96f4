from measure import Measure


class UnitBase:
    """Common unit behaviour."""

    factor = 1.0


def convert(value) -> Measure:
    """Wrap a raw number."""
    return Measure(value)
