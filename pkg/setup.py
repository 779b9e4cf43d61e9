import numpy as np
from setuptools import Extension, setup

# The compiled kernel is optional: the package falls back to the numpy
# reference implementation when the extension is absent.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "dmpkit._fast._core",
                ["src/dmpkit/_fast/_core.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level=3,
    )
except Exception:
    ext_modules = []

setup(ext_modules=ext_modules)
