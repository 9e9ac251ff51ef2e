END = "\033[0m"


def paint(s):
    return "\033[31m" + s + END
