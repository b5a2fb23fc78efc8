from setuptools import Extension, setup

from Cython.Build import cythonize

extensions = [
    Extension("spurline._spurkern", ["src/spurline/_spurkern.pyx"]),
]

setup(ext_modules=cythonize(extensions, language_level="3"))
