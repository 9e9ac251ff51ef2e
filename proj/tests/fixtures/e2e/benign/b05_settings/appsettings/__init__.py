import json
import os

DEFAULT_PATH = "settings.json"


def load():
    path = os.getenv("APP_SETTINGS", DEFAULT_PATH)
    with open(path) as handle:
        return json.load(handle)
