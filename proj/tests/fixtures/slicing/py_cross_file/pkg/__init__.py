from .util import fetch

ENDPOINT = "https://example.com/data"
content = fetch(ENDPOINT)
