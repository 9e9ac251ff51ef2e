from setuptools import setup

setup(name="tokenkit", version="1.0.0", packages=["tokenkit"])
