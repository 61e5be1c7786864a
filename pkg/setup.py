#!/usr/bin/env python
from setuptools import setup, find_packages

setup(
    name="v2x-delivery",
    version="0.1",
    packages=find_packages(exclude=["tests", "tests.*"]),
    py_modules=["main"],
    install_requires=[
        "numpy>=1.26.0",
        "scipy>=1.11.0",
        "pandas>=2.2.0",
        "networkx>=3.2",
        "pydantic>=1.10.0,<2.0.0",
        "python-dotenv==1.0.0",
    ],
    entry_points={
        "console_scripts": ["v2x-delivery=main:main"],
    },
    python_requires=">=3.8",
)
