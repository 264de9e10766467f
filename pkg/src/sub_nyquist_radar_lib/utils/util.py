import enum
import os
import pathlib
import time

import numpy as np
import sympy
from IPython.display import display, Latex


PROJECT_ROOT_PATH = pathlib.Path(__file__).parent.parent.parent.parent
EXEC_DATE_STR = time.strftime("%Y%m%d_%H%M%S")


def get_latex_symbol_and_unit(
        label: str,
        symbol: sympy.Symbol,
        unit: sympy.Symbol,
):
    if str(unit) in ("", "-"):
        return Latex(rf"{label}: $ \ {sympy.latex(symbol)}$")
    return Latex(rf"{label}: $ \ {sympy.latex(symbol)} \ [{sympy.latex(unit)}]$")


def display_latex_symbol_and_unit(
        label: str,
        symbol: sympy.Symbol,
        unit: sympy.Symbol,
):
    display(get_latex_symbol_and_unit(label, symbol, unit))


def derive_seed(master_seed: int, *keys: int) -> int:
    """Independent 64-bit seed for a (master, key...) stream, e.g. (seed, point, trial)."""
    sequence = np.random.SeedSequence([int(master_seed), *[int(k) for k in keys]])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def make_rng(master_seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, *keys))


class DirectoryFactory:
    """Per-run output directories, <root>/<exec date>/<name>.

    GESEDD_DIR_LOG / GESEDD_DIR_DATA pin a single directory, GESEDD_DIR_OUTPUT moves the root.
    """
    __DIRECTORIES: dict = {}
    __ENV_PREFIX = "GESEDD_DIR"

    class DirectoryName(enum.Enum):
        LOG = "log"
        DATA = "data"

    @classmethod
    def get_directory(cls, name: DirectoryName) -> pathlib.Path:
        if name not in cls.__DIRECTORIES:
            directory = cls.resolve(name)
            directory.mkdir(parents=True, exist_ok=True)
            cls.__DIRECTORIES[name] = directory
        return cls.__DIRECTORIES[name]

    @classmethod
    def resolve(cls, name: DirectoryName) -> pathlib.Path:
        own = os.environ.get(cls.get_env_from_directory_name(name))
        if own:
            return pathlib.Path(own) / EXEC_DATE_STR
        root = os.environ.get(f"{cls.__ENV_PREFIX}_OUTPUT")
        root = pathlib.Path(root) if root else PROJECT_ROOT_PATH / "output"
        return root / EXEC_DATE_STR / name.value

    @staticmethod
    def get_env_from_directory_name(directory_name: DirectoryName) -> str:
        return f"{DirectoryFactory.__ENV_PREFIX}_{directory_name.value.upper()}"
