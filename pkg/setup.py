"""Build script: compiles the optional Monte-Carlo kernel.

The extension is a speedup only; if Cython or a C compiler is missing the
install falls back to the pure-Python lane (``dirimult.rng``), which is
selected automatically at import.  Set DIRIMULT_PURE=1 to skip the
extension on purpose.

-ffp-contract=off is required: fused multiply-adds would change the
kernel's doubles and break bit-identity with the pure lane.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext
from setuptools.errors import CCompilerError, ExecError, PlatformError


class optional_build_ext(build_ext):
    """Build the kernel if possible; warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except (CCompilerError, ExecError, PlatformError, OSError) as exc:
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except (CCompilerError, ExecError, PlatformError, OSError) as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"WARNING: could not build the dirimult._mckernel extension "
            f"({exc}); installing with the pure-Python kernel only",
            file=sys.stderr,
        )


def extensions():
    if os.environ.get("DIRIMULT_PURE") == "1":
        return [], {}
    try:
        from Cython.Build import cythonize
    except ImportError:
        print(
            "WARNING: Cython unavailable; installing with the pure-Python "
            "kernel only",
            file=sys.stderr,
        )
        return [], {}
    if sys.platform == "win32":
        compile_args = ["/O2"]
    else:
        compile_args = ["-O2", "-ffp-contract=off"]
    ext = Extension(
        "dirimult._mckernel",
        ["src/dirimult/_mckernel.pyx"],
        extra_compile_args=compile_args,
    )
    modules = cythonize([ext], compiler_directives={"language_level": "3"})
    return modules, {"build_ext": optional_build_ext}


ext_modules, cmdclass = extensions()
setup(ext_modules=ext_modules, cmdclass=cmdclass)
