import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the compiled interpreter core if possible; the package falls
    back to the pure-Python core when the extension is unavailable."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler / Cython
            print(f"warning: skipping compiled core build ({exc}); "
                  "pure-Python interpreter will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); "
                  "pure-Python interpreter will be used")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    exts = [
        Extension(
            "mutagrid.minilang._fastcore",
            ["src/mutagrid/minilang/_fastcore.pyx"],
            include_dirs=[numpy.get_include()],
            # mini-language ints are defined to wrap; keep signed overflow defined in C
            extra_compile_args=["-O3", "-fwrapv"],
        )
    ]
    return cythonize(exts, compiler_directives={"language_level": "3"})


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
