import os
from ..util.report import Report as R
from .model import Model
import app.util.report as rep


def train(data):
    model = Model()
    out: R = model.fit(data)
    path = os.path.join("runs", "last")
    return out.summary()


def publish(report):
    return rep.render(report)
