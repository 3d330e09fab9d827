"""Setup script for style-transformer package."""
from setuptools import setup

setup()
