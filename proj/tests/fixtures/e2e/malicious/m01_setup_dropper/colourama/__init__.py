RESET = "\033[0m"


def red(text):
    return "\033[31m" + text + RESET
