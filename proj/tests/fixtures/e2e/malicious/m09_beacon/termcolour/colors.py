COLORS = {"red": 31, "green": 32, "yellow": 33}


def colored(text, color):
    code = COLORS.get(color, 0)
    return "\033[%dm%s\033[0m" % (code, text)
