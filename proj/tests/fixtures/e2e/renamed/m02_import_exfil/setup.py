from setuptools import setup

setup(name="reqeusts", version="2.31.1", packages=["reqeusts"])
