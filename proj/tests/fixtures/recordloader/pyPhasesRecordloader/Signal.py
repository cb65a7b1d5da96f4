from enum import Enum


class SignalType(Enum):
    UNKNOWN = 0
    EEG = 1
    EOG = 2


class Signal:
    """A single recorded channel."""

    def __init__(self, name, signal, frequency=256):
        self.name = name
        self.signal = signal
        self.frequency = frequency
        self.typeStr = None
        self.type = SignalType.UNKNOWN

    def setSignalTypeFromTypeStr(self):
        self.type = SignalType[self.typeStr.upper()]
