import time

SESSION_START = time.monotonic()


def elapsed():
    return time.monotonic() - SESSION_START
