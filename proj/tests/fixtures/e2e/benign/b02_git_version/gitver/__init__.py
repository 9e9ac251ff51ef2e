import subprocess


def describe(repo="."):
    out = subprocess.run(
        ["git", "describe", "--tags", "--always"],
        cwd=repo,
        capture_output=True,
        text=True,
        check=True,
    )
    return out.stdout.strip()
