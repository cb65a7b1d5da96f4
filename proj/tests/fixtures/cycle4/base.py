class Base:
    """Root of the shape hierarchy."""

    def area(self):
        return 0.0
