from pyPhasesRecordloader.RecordSignal import RecordSignal
from pyPhasesRecordloader.util import channelAliases


class RecordLoader:
    def __init__(self, filePath):
        self.filePath = filePath
        self.aliases = channelAliases()

    def renameChannel(self, signal: RecordSignal, newChannelName, typeStr):
        newSignal = signal.getSignalByName(newChannelName)
        newSignal.typeStr = typeStr
        newSignal.setSignalTypeFromTypeStr()
        return newSignal
