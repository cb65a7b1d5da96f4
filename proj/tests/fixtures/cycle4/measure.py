from units import UnitBase


class Measure(UnitBase):
    def __init__(self, value):
        self.value = value
