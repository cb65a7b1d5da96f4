class Report:
    """Summary of a training run."""

    def __init__(self, weights):
        self.weights = weights

    def summary(self):
        return "%d weights" % len(self.weights)


def render(report: Report):
    return report.summary()
