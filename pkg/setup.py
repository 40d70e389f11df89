"""Build script.

The compiled kernel extension is optional: if Cython or a C compiler is
missing the build falls back to the pure-Python implementations in
``vdn._kernels.fallback`` and everything still works (slower).
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if we can, warn and continue if we can't."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping compiled kernels ({exc}); "
                  "using pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not compile {ext.name} ({exc}); "
                  "using pure-Python fallback")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "vdn._kernels._core",
        ["src/vdn/_kernels/_core.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
