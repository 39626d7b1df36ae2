import pathlib
import setuptools

NAME = "cellpyx"
URL = "https://github.com/cellpyx/" + NAME
HERE = pathlib.Path(__file__).parent
print(f"\nHERE = {HERE.absolute()}\n")
README = (HERE / "README.md").read_text()
REQUIRES = (HERE / "requirements.txt").read_text().strip().split("\n")
REQUIRES = [lin.strip() for lin in REQUIRES if not lin.strip().startswith("#")]
print(f'\nVERSION = {(HERE / NAME / "VERSION").absolute()}\n')
VERSION = (HERE / NAME / "VERSION").read_text().strip()
# See https://packaging.python.org/en/latest/guides/single-sourcing-package-version/

packages = setuptools.find_packages(exclude=["tests", "experiments", "examples", "examples.*"])
print ("packages: ", packages)

setuptools.setup(
    name=NAME,
    version=VERSION,
    packages=packages,
    install_requires=REQUIRES,
    extras_require={"experiments": ["experiments_csv"], "test": ["pytest"]},
    author="cellpyx team",
    description="Physics-based and equivalent-circuit battery models: simulation, identification and comparison",
    keywords="lithium-ion battery model identification equivalent circuit single particle hysteresis",
    long_description=README,
    long_description_content_type="text/markdown",
    url=URL,
    project_urls={
        "Documentation": URL,
        "Source Code": URL,
        "Bug Reports": f"{URL}/issues",
    },
    python_requires=">=3.9",
    include_package_data=True,
    package_data={NAME: ["VERSION", "data/*.json"]},
    entry_points={"console_scripts": ["cellpyx = cellpyx.cli:main"]},
    classifiers=[
        # see https://pypi.org/classifiers/
        "Development Status :: 3 - Alpha",
    ],
)

# Build:
#   Delete old folders: build, dist, *.egg_info, .venv_test.
#   Then run:
#        pip install build
#        python -m build
