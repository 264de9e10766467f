import dataclasses
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from sub_nyquist_radar_lib.utils.exceptions import ContractViolation
from sub_nyquist_radar_lib.utils.logger import LoggerFactory

logger = LoggerFactory.get_logger(__name__)

FLOAT_FORMAT = "%.12g"
SVG_SALT = "gesedd"


@dataclasses.dataclass(frozen=True)
class EmitPaths:
    csv: pathlib.Path
    svg: pathlib.Path | None = None

    @classmethod
    def in_directory(cls, directory: str | pathlib.Path, stem: str, svg: bool = True) -> "EmitPaths":
        directory = pathlib.Path(directory)
        return cls(directory / f"{stem}.csv", directory / f"{stem}.svg" if svg else None)


def write_csv(table: pd.DataFrame, path: pathlib.Path, config_hash: str, pooling: str | None = None) -> None:
    header = f"# gesedd config={config_hash}"
    if pooling is not None:
        header += f" pooling={pooling}"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(header + "\n")
        table.to_csv(f, index=False, float_format=FLOAT_FORMAT, na_rep="NaN", lineterminator="\n")


def read_csv(path: str | pathlib.Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def write_svg(table: pd.DataFrame,
              path: pathlib.Path,
              x: str,
              ys: list[str],
              group: str | None = None,
              title: str | None = None,
              ) -> None:
    """Line plot of `ys` against `x`, one series per column (and per group value)."""
    plt.rcParams["svg.hashsalt"] = SVG_SALT
    fig, ax = plt.subplots(figsize=(6, 4))
    groups = [(None, table)] if group is None else list(table.groupby(group, sort=True))
    for key, frame in groups:
        finite = frame[np.isfinite(frame[x].astype(float))]
        for y in ys:
            label = y if key is None else f"{y} ({group}={key})"
            ax.plot(finite[x], finite[y], marker="o", label=label)
    ax.set_xlabel(x)
    ax.grid(True)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit(table: pd.DataFrame,
         paths: EmitPaths,
         config_hash: str,
         x: str = "sweep_value",
         ys: list[str] | None = None,
         group: str | None = None,
         pooling: str | None = None,
         ) -> EmitPaths:
    if table.empty:
        raise ContractViolation("Cannot emit an empty table.")
    write_csv(table, paths.csv, config_hash, pooling)
    logger.info(f"Wrote {paths.csv}")
    if paths.svg is not None:
        write_svg(table, paths.svg, x, ys or ["rrmse_tau", "rrmse_nu"], group, title=paths.csv.stem)
        logger.info(f"Wrote {paths.svg}")
    return paths
