import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("KTCOMPLEX_PURE_PYTHON"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("ktcomplex._kernels", ["src/ktcomplex/_kernels.pyx"], optional=True)],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
