"""
Grayscale and colormap renders of IWEs, contrast heatmaps and depth maps.

Count-mode IWEs are min-max scaled to [0, 255] and may be shown in negative form (dark
edges on white). Polarity-mode IWEs map zero to mid-gray 128 with symmetric scaling, so
positive and negative deposits of equal magnitude land equally far from gray.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from loguru import logger
from matplotlib import colormaps
from numpy.typing import ArrayLike, NDArray
from PIL import Image

from .iwe import IWE
from .optimize import Heatmap
from .reader import Raster, read_raster
from .type_helpers import AccumulationMode

DEFAULT_HEATMAP_COLORMAP: str = "inferno"
DEFAULT_DEPTH_COLORMAP: str = "viridis"
POLARITY_GRAY: int = 128
IMAGE_SUFFIXES: tuple[str, ...] = (".png", ".pgm")


def _to_byte(values: NDArray[np.float64]) -> NDArray[np.uint8]:
    return np.clip(np.floor(values + 0.5), 0.0, 255.0).astype(np.uint8)


def count_to_gray(values: ArrayLike, *, negative: bool = False) -> NDArray[np.uint8]:
    """Min-max scale to [0, 255]; a constant image maps to 0 (255 in negative form)."""
    grid: NDArray[np.float64] = np.asarray(values, dtype=np.float64)
    low: float = float(grid.min()) if grid.size else 0.0
    span: float = float(grid.max()) - low if grid.size else 0.0
    scaled: NDArray[np.float64] = (grid - low) * (255.0 / span) if span > 0.0 else np.zeros_like(grid)
    pixels: NDArray[np.uint8] = _to_byte(scaled)
    return (255 - pixels).astype(np.uint8) if negative else pixels


def polarity_to_gray(values: ArrayLike) -> NDArray[np.uint8]:
    """Zero to 128, +-max|H| to 255 and 0."""
    grid: NDArray[np.float64] = np.asarray(values, dtype=np.float64)
    peak: float = float(np.abs(grid).max()) if grid.size else 0.0
    if peak == 0.0:
        return np.full(grid.shape, POLARITY_GRAY, dtype=np.uint8)
    return _to_byte(127.5 + 127.5 * grid / peak)


def iwe_to_gray(iwe: IWE, *, negative: bool = False) -> NDArray[np.uint8]:
    if iwe.mode is AccumulationMode.POLARITY:
        return polarity_to_gray(iwe.values)
    return count_to_gray(iwe.values, negative=negative)


def colorize(
    values: ArrayLike,
    *,
    colormap: str = DEFAULT_HEATMAP_COLORMAP,
    limits: tuple[float, float] | None = None,
) -> NDArray[np.uint8]:
    """RGB render through a matplotlib colormap; NaN and -inf pixels are black."""
    grid: NDArray[np.float64] = np.asarray(values, dtype=np.float64)
    finite: NDArray[np.bool_] = np.isfinite(grid)
    if limits is None:
        limits = (float(grid[finite].min()), float(grid[finite].max())) if finite.any() else (0.0, 1.0)
    low, high = limits
    span: float = high - low if high > low else 1.0
    normalized: NDArray[np.float64] = np.clip((np.where(finite, grid, low) - low) / span, 0.0, 1.0)
    rgba: NDArray[np.float64] = colormaps[colormap](normalized)
    rgb: NDArray[np.uint8] = _to_byte(rgba[..., :3] * 255.0)
    rgb[~finite] = 0
    return rgb


def save_image(path: Path, pixels: NDArray[np.uint8]) -> Path:
    """Save a grayscale (H, W) or RGB (H, W, 3) byte image as PNG or PGM (chosen by suffix)."""
    destination: Path = Path(path)
    suffix: str = destination.suffix.lower()
    if suffix not in IMAGE_SUFFIXES:
        raise ValueError(f"Unsupported image extension '{destination.suffix}'. Use .png or .pgm.")
    if suffix == ".pgm" and pixels.ndim != 2:
        raise ValueError("PGM output needs a grayscale image.")
    destination.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(pixels)).save(destination)
    logger.info(
        "Rendered {width}x{height} image to {path}", width=pixels.shape[1], height=pixels.shape[0], path=destination
    )
    return destination


def render_iwe(iwe: IWE, path: Path, *, negative: bool = False) -> Path:
    return save_image(path, iwe_to_gray(iwe, negative=negative))


def render_heatmap(heatmap: Heatmap, path: Path, *, colormap: str = DEFAULT_HEATMAP_COLORMAP) -> Path:
    """2-D heatmaps only: the first parameter runs left to right, the second top to bottom."""
    if heatmap.grid.dim != 2:
        raise ValueError(f"Only 2-D heatmaps can be rendered, got {heatmap.grid.dim} dimensions.")
    return save_image(path, colorize(heatmap.values.T, colormap=colormap))


def render_depth(
    depth: ArrayLike,
    path: Path,
    *,
    limits: tuple[float, float] | None = None,
    colormap: str = DEFAULT_DEPTH_COLORMAP,
) -> Path:
    """Colorized depth map; unselected (NaN) pixels are black."""
    return save_image(path, colorize(depth, colormap=colormap, limits=limits))


def render_raster(source: Path, destination: Path, *, negative: bool = False) -> Path:
    """
    Render a raw grid file written by `writer.write_raster`.

    Polarity grids use the symmetric mid-gray map, depth grids the depth colormap and every
    other kind the count map.

    Raises:
        RasterFormatError: When the file header is corrupt.
    """
    raster: Raster = read_raster(source)
    if raster.kind == AccumulationMode.POLARITY.value:
        return save_image(destination, polarity_to_gray(raster.values))
    if raster.kind == "depth":
        return render_depth(raster.values, destination)
    return save_image(destination, count_to_gray(raster.values, negative=negative))


__all__: list[str] = [
    "colorize",
    "count_to_gray",
    "iwe_to_gray",
    "polarity_to_gray",
    "render_depth",
    "render_heatmap",
    "render_iwe",
    "render_raster",
    "save_image",
]
