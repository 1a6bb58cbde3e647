from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; _backend falls back at import
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("mixedflow._kernels", ["src/mixedflow/_kernels.pyx"], extra_compile_args=["-O2"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
