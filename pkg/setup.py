from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "chirpsim.kernels._speedups",
        ["src/chirpsim/kernels/_speedups.pyx"],
        extra_compile_args=["-O3"],
    )
]

# name/version/packages are repeated here so that pre-PEP-621 setuptools
# (< 61) still produces a correctly named wheel; newer setuptools reads
# pyproject.toml and merges.
setup(
    name="chirpsim",
    version="0.1.0",
    package_dir={"": "src"},
    packages=["chirpsim", "chirpsim.kernels"],
    install_requires=["numpy>=1.24", "PyYAML>=6.0"],
    entry_points={"console_scripts": ["chirpsim = chirpsim.cli:main"]},
    ext_modules=cythonize(extensions, language_level="3"),
)
