from setuptools import find_packages, setup

setup(
    name="predictoco",
    packages=find_packages(exclude=["tests"]),
    version="0.1.0",
    description="Online convex optimization with long-term constraints and gradient hints",
    install_requires=[
        "numpy",
        "pandas>=0.24",
        "scipy",
        "scikit-learn",
        "python-dotenv",
        "flatten-dict",
        "ruamel.yaml",
    ],
    entry_points={
        "console_scripts": [
            "run_predictoco = predictoco.run_predictoco_cli:main",
        ]
    },
)
