from setuptools import setup, find_packages

setup(
    name="lzro-clock-sim",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    py_modules=["main", "control"],
    install_requires=[
        "numpy>=1.22",
        "scipy>=1.9",
        "pandas>=2.0.0",
    ],
    extras_require={"test": ["pytest>=7.0"]},
    entry_points={"console_scripts": ["lzro=main:main"]},
    python_requires=">=3.9",
    description="Landau-Zener-Stueckelberg interference and Rabi oscillation simulator for optical lattice clocks",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Topic :: Scientific/Engineering :: Physics",
    ],
)
