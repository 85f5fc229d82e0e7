"""Node grid geometry: downsampled lattice and row-major node indexing"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import BoundsError, ShapeMismatchError


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class NodeGrid:
    """The h'×w' lattice diffusion runs on; node (r, c) has index r·w' + c."""

    height: int
    width: int
    downsample_factor: int = 1

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ShapeMismatchError(f"grid must be at least 1x1, got {self.height}x{self.width}")
        if self.downsample_factor < 1:
            raise ShapeMismatchError(f"downsample factor must be >= 1, got {self.downsample_factor}")

    @property
    def count(self) -> int:
        return self.height * self.width

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    @classmethod
    def for_image(cls, image_height: int, image_width: int, factor: int) -> "NodeGrid":
        """Ceil-divide an image into ρ×ρ blocks."""
        if factor < 1:
            raise ShapeMismatchError(f"downsample factor must be >= 1, got {factor}")
        return cls(ceil_div(image_height, factor), ceil_div(image_width, factor), factor)

    def padded_shape(self) -> Tuple[int, int]:
        """Image-resolution extent covered by the grid after edge padding."""
        return self.height * self.downsample_factor, self.width * self.downsample_factor

    def reshape(self, values: np.ndarray) -> np.ndarray:
        """Lay a length-N vector (or N×K matrix) out on the grid."""
        values = np.asarray(values)
        if values.shape[0] != self.count:
            raise ShapeMismatchError(f"expected {self.count} nodes, got {values.shape[0]}")
        return values.reshape((self.height, self.width) + values.shape[1:])


def node_index(row: int, col: int, grid: NodeGrid) -> int:
    """Row-major node id of cell (row, col)."""
    if not (0 <= row < grid.height and 0 <= col < grid.width):
        raise BoundsError(
            f"cell ({row}, {col}) outside {grid.height}x{grid.width} grid"
        )
    return row * grid.width + col


def node_coords(node: int, grid: NodeGrid) -> Tuple[int, int]:
    """Inverse of node_index."""
    if not 0 <= node < grid.count:
        raise BoundsError(f"node {node} out of range for {grid.count}-node grid")
    return divmod(node, grid.width)
