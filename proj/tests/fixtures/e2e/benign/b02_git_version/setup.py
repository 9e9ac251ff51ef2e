from setuptools import setup

setup(name="gitver", version="0.2.0", packages=["gitver"])
