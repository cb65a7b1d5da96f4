from .Signal import Signal


class RecordSignal:
    """All channels of one recording."""

    def __init__(self):
        self.signals = []
        self.signalNames = []

    def addSignal(self, signal: Signal):
        self.signals.append(signal)
        self.signalNames.append(signal.name)

    def getSignalByName(self, name) -> Signal:
        return self.signals[self.signalNames.index(name)]
