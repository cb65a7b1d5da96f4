def channelAliases():
    return {"EEG": ["C3-A2", "C4-A1"], "EOG": ["LOC", "ROC"]}
