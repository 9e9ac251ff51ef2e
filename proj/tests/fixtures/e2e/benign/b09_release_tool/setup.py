from setuptools import setup

setup(name="shipit-release", version="0.7.0", packages=["shipit"])
