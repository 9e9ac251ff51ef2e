from setuptools import setup

setup(name="weatherly", version="1.3.0", packages=["weatherly"], install_requires=["requests"])
