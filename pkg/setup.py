"""Build script: compiles the optional Cython kernel.

The package is fully functional without the extension (a pure-Python
kernel is selected at import time); the build therefore degrades
gracefully when Cython or a C compiler is missing.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("eatsim._speedups", ["src/eatsim/_speedups.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"warning: skipping compiled kernel ({exc}); pure-Python fallback will be used")

setup(ext_modules=ext_modules)
