import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = cythonize(
    Extension(
        "dqibench._native",
        ["src/dqibench/_native.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
    ),
    compiler_directives={
        "language_level": "3",
        "boundscheck": False,
        "wraparound": False,
        "cdivision": True,
    },
)

setup(ext_modules=extensions)
