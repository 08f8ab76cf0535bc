from setuptools import setup, find_packages

NAME = "kaa"
VERSION = "1.0.0"

# To install the library, run the following
#
# pip install .
#
# prerequisite: setuptools

REQUIRES = [
    "numpy>=1.24",
    "scipy>=1.11",
    "numba>=0.58",
    "python-dotenv>=1.0.0",
    "psutil>=5.9.6",
    "prometheus-client>=0.19.0",
]

setup(
    name=NAME,
    version=VERSION,
    description="Asymptotic action-angle coordinates for repulsive Kepler scattering and a gas/point-charge simulator",
    keywords=["Kepler", "action-angle", "Vlasov-Poisson", "mean field"],
    install_requires=REQUIRES,
    packages=find_packages(exclude=["examples", "examples.*"]),
    python_requires=">=3.9",
    entry_points={
        'console_scripts': ['kaa=kaa.__main__:main']},
    long_description="""\
    Exact coordinate transforms of the repulsive Kepler problem (conserved quantities, asymptotic
    action-angle and super-integrable coordinates, the exact flow), numerical Poisson-bracket and
    bound checks, and a particle simulator for a gas scattering off a point charge with
    field-decay, conservation and modified-scattering diagnostics.
    """
)
