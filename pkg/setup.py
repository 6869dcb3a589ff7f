"""
ssicert - Setup
"""

from setuptools import setup, find_packages
from pathlib import Path

# Read README
readme_file = Path(__file__).parent / "INSTALL.md"
long_description = readme_file.read_text() if readme_file.exists() else ""

setup(
    name="ssicert",
    version="0.1.0",
    description="Certified covariance-driven subspace identification with H2/H-infinity model-error bounds",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(include=["ssicert", "ssicert.*"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.22.0",
        "scipy>=1.8.0",
        "cvxpy>=1.3.0",  # SDP modelling; Clarabel and SCS ship with it
        "click>=8.0.0",
        "rich>=10.0.0",
        "python-dotenv>=0.19.0",
    ],
    extras_require={
        "dev": [
            "pytest>=7.0.0",
            "pytest-cov>=3.0.0",
            "black>=22.0.0",
            "isort>=5.10.0",
            "flake8>=4.0.0",
            "mypy>=0.950",
        ],
    },
    entry_points={
        "console_scripts": [
            "ssicert=ssicert.cli:cli",
        ],
    },
    include_package_data=True,
    zip_safe=False,
)
