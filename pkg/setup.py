"""
Setup script for qmcltl, the approximate LTL model checker for quantum Markov chains.
"""

from setuptools import setup, find_packages

setup(
    name="qmcltl",
    version="0.1.0",
    description="Approximate LTL model checking of quantum Markov chains via spectral horizons and Buchi automata",
    author="qmcltl Team",
    author_email="example@example.com",
    packages=find_packages(exclude=["examples", "examples.*"]),
    py_modules=["qmcltl"],
    install_requires=[
        "python-dotenv",
        "click",
        "numpy",
        "scipy",
        "lark",
        "networkx",
    ],
    extras_require={
        "test": ["pytest"],
    },
    entry_points={
        "console_scripts": [
            "qmcltl=qmcltl:cli",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires=">=3.9",
)
