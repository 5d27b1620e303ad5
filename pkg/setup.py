import numpy as np
from setuptools import setup, Extension

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [Extension("lexalign.kernels._selection",
                   ["src/lexalign/kernels/_selection.pyx"],
                   include_dirs=[np.get_include()])],
        language_level=3,
    )

# the compiled kernel is optional: the package falls back to the
# pure-numpy selection path when the extension is unavailable
setup(ext_modules=ext_modules)
