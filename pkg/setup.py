from setuptools import Extension, setup
from Cython.Build import cythonize

ext_modules = [
    Extension("marylab._ext", ["src/marylab/_ext.pyx"]),
]

setup(ext_modules=cythonize(ext_modules, language_level=3))
