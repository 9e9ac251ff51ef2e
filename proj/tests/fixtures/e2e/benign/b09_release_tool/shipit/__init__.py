import subprocess

import requests

PYPI = "https://pypi.org/pypi/{}/json"


def latest_version(name):
    info = requests.get(PYPI.format(name), timeout=5).json()
    return info["info"]["version"]


def build_dist():
    subprocess.run(["python", "-m", "build"], check=True)
