"""Paths to the fixture knowledge base and mini corpus shipped for tests."""

from importlib.resources import files


def path(name):
    return str(files(__package__) / name)


TRAFFIC_KB = path("traffic.kb")
MINI_CORPUS = path("mini.corpus")
MINI_GOLD = path("mini.gold")
MINI_REPLIES = path("mini.replies")
MINI_FRAME_PREDS = path("mini.frame-preds")
