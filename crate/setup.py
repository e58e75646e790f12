"""Build the `hintelab_py` extension module by delegating to cargo.

Neither maturin nor setuptools-rust is assumed; the extension is a plain
cdylib that cargo builds, copied to wherever setuptools expects it.
"""

import shutil
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

ROOT = Path(__file__).resolve().parent


class CargoExtension(Extension):
    def __init__(self, name, crate):
        super().__init__(name, sources=[])
        self.crate = crate


class cargo_build_ext(build_ext):
    def build_extension(self, ext):
        subprocess.run(
            ["cargo", "build", "--release", "-p", ext.crate],
            cwd=ROOT,
            check=True,
        )
        stem = ext.name.replace("-", "_")
        if sys.platform == "darwin":
            built = ROOT / "target" / "release" / f"lib{stem}.dylib"
        elif sys.platform == "win32":
            built = ROOT / "target" / "release" / f"{stem}.dll"
        else:
            built = ROOT / "target" / "release" / f"lib{stem}.so"
        dest = Path(self.get_ext_fullpath(ext.name))
        dest.parent.mkdir(parents=True, exist_ok=True)
        shutil.copyfile(built, dest)


setup(
    packages=[],
    ext_modules=[CargoExtension("hintelab_py", crate="hintelab-py")],
    cmdclass={"build_ext": cargo_build_ext},
)
