from setuptools import find_namespace_packages, setup

with open("requirements.txt") as f:
    requirements = [line.strip() for line in f if line.strip()]

setup(
    name="aigsynth",
    version="0.1.0",
    description="Circuit synthesis from AIGER safety specifications by SAT-based learning",
    packages=find_namespace_packages(include=["modules", "modules.*"]),
    py_modules=["main"],
    install_requires=requirements,
    python_requires=">=3.8",
    entry_points={"console_scripts": ["aigsynth=main:main"]},
)
