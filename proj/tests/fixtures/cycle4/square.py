from base import Base


class Square(Base):
    """Axis-aligned square."""

    def __init__(self, side):
        self.side = side

    def area(self):
        return self.side * self.side
