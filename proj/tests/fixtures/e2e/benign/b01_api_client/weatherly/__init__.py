import requests

API = "https://api.open-meteo.com/v1/forecast"


def forecast(lat, lon):
    params = {"latitude": lat, "longitude": lon, "hourly": "temperature_2m"}
    resp = requests.get(API, params=params, timeout=10)
    resp.raise_for_status()
    return resp.json()["hourly"]
