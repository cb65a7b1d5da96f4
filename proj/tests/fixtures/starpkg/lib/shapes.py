PI = 3.14159


class Circle:
    def __init__(self, r):
        self.r = r


class Rect:
    def __init__(self, w, h):
        self.w = w
        self.h = h


def make_circle(r) -> Circle:
    return Circle(r)
