"""Shared fixtures.

The downstream engine is driven only as a subprocess; nothing in this
suite imports it. Generated scene directories are built once per
session and treated as read-only.
"""

import subprocess
import sys

import pytest

ENGINE = (sys.executable, "-m", "symscene")


def run_engine(*args, check=True):
    proc = subprocess.run([*ENGINE, *args], capture_output=True, text=True)
    if check and proc.returncode != 0:
        raise AssertionError(
            f"engine call {' '.join(args)} exited {proc.returncode}: {proc.stderr}"
        )
    return proc


@pytest.fixture(scope="session")
def scene_dirs(tmp_path_factory):
    """Ten generated scene directories with masks, depth, rgb, truth."""
    root = tmp_path_factory.mktemp("scenes")
    dirs = []
    for seed in range(10):
        target = root / f"scene_{seed}"
        run_engine(
            "synth",
            "--seed",
            str(seed),
            "--shapes",
            str(2 + seed % 5),
            "--out",
            str(target),
        )
        dirs.append(target)
    return dirs
