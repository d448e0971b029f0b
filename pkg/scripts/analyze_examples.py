#!/usr/bin/env python3
"""Print the signature analyses for the bundled example inputs."""

import pathlib
import sys

from adtsolve.cli import main

HERE = pathlib.Path(__file__).parent


def run() -> int:
    code = 0
    for path in sorted((HERE / "inputs").glob("*.smt2")):
        print(f"== {path.name}")
        code |= main(["analyze", str(path)])
        print()
    return code


if __name__ == "__main__":
    sys.exit(run())
