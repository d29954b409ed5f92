from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("gencount._ckernels", ["src/gencount/_ckernels.pyx"])],
        language_level="3",
    )
except ImportError:
    # No Cython at build time: the package falls back to the pure-numpy
    # kernels at import, so build the Python-only distribution.
    ext_modules = []

setup(ext_modules=ext_modules)
