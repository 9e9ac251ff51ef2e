from setuptools import setup

setup(name="pyscreenshotz", version="0.9", packages=["pyscreenshotz"])
