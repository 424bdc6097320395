"""
holoflow setup
"""

from setuptools import setup, find_packages
from pathlib import Path

# Read README
readme_file = Path(__file__).parent / "README.md"
if readme_file.exists():
    long_description = readme_file.read_text(encoding='utf-8')
else:
    long_description = "Singular complex analytic vector fields"

setup(
    name="holoflow-py",
    use_scm_version={"write_to": "holoflow/_version.py", "fallback_version": "0.0.0+unknown"},
    setup_requires=['setuptools_scm'],
    author="holoflow contributors",
    description="Singular complex analytic vector fields: local classes, flows, asymptotic values and phase portraits",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: GNU General Public License v2 or later (GPLv2+)",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
    python_requires=">=3.8",
    install_requires=[
        "numpy>=1.22.0",
        "scipy>=1.8.0",
        "jsonschema>=4.0.0",
        "lxml>=4.9.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "pytest-cov>=4.0.0",
            "pytest-mock>=3.10.0",
            "black>=22.0.0",
            "ruff>=0.1.0",
            "mypy>=0.950",
        ],
    },
    entry_points={
        "console_scripts": [
            "hflow=holoflow.cli:main",
        ],
    },
    zip_safe=False,
)
