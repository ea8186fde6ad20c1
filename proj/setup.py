"""CMake-driven extension build for the tinytok package.

Package metadata lives in pyproject.toml; this file only teaches setuptools
how to compile the pybind11 module through the project's CMake build.
"""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).parent.resolve()
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)

        pybind11_dir = subprocess.run(
            [sys.executable, "-m", "pybind11", "--cmakedir"],
            check=True, capture_output=True, text=True,
        ).stdout.strip()

        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DCMAKE_BUILD_TYPE=Release",
                "-DTINYTOK_BUILD_TESTS=OFF",
                "-DTINYTOK_BUILD_CLI=OFF",
                "-DTINYTOK_BUILD_PYTHON=ON",
                f"-Dpybind11_DIR={pybind11_dir}",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_tinytok"],
            check=True,
        )

        built = next((build_dir / "python" / "tinytok").glob("_tinytok.*"))
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built, dest)


setup(
    ext_modules=[CMakeExtension("tinytok._tinytok")],
    cmdclass={"build_ext": CMakeBuild},
)
