"""Build hook for the optional compiled matching kernel.

The package is fully functional without the extension: ptrgraph._kernel
falls back to the pure-Python implementation when the compiled module is
missing. Set PTRGRAPH_PURE=1 to skip compilation entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("PTRGRAPH_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "ptrgraph._kernel._cmatch",
                    ["src/ptrgraph/_kernel/_cmatch.pyx"],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
