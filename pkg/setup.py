"""Build script handling the optional compiled summation core.

The package is fully functional without the extension (a numpy fallback is
selected at import); building it just makes the O(cells^2) kernel sums fast.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "causalcz._speedups",
                ["src/causalcz/_speedups.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
