RED = "red"


def blend(a, b):
    return a + b
