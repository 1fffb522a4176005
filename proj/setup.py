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
        source_dir = Path(__file__).resolve().parent
        build_dir = Path(self.build_temp).resolve() / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        subprocess.run(
            [
                "cmake",
                "-S", str(source_dir),
                "-B", str(build_dir),
                "-DVAPORSIM_BUILD_PYTHON=ON",
                "-DVAPORSIM_BUILD_TESTS=OFF",
                "-DCMAKE_BUILD_TYPE=Release",
                f"-DPython3_EXECUTABLE={sys.executable}",
            ],
            check=True,
        )
        subprocess.run(
            ["cmake", "--build", str(build_dir), "--target", "_core", "-j4"],
            check=True,
        )
        built = sorted((build_dir / "python" / "vaporsim").glob("_core*.so"))
        if not built:
            raise RuntimeError("CMake did not produce the _core module")
        target = Path(self.get_ext_fullpath(ext.name)).resolve()
        target.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(built[-1], target)
        data_dir = target.parent / "data"
        data_dir.mkdir(parents=True, exist_ok=True)
        shutil.copy2(source_dir / "data" / "cesium.cfg", data_dir)


setup(
    ext_modules=[CMakeExtension("vaporsim._core")],
    cmdclass={"build_ext": CMakeBuild},
)
