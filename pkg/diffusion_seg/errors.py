"""Exception hierarchy for the diffusion segmentation engine"""

from typing import List


class DiffusionSegError(ValueError):
    """Base class for every data error raised by the engine"""


class BoundsError(DiffusionSegError, IndexError):
    """A node, pixel or stage index lies outside its grid"""


class ConfigValidationError(DiffusionSegError):
    """One or more configuration fields violate their invariants"""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ShapeMismatchError(DiffusionSegError):
    """Operands disagree on grid, node count or class count"""


class NonFiniteError(DiffusionSegError):
    """A NaN or infinite value reached a place that requires finite data"""


class DescriptorWindowError(DiffusionSegError):
    """Image too small for the largest descriptor window"""


class PyramidFormatError(DiffusionSegError):
    """Malformed FPYR feature pyramid file"""


class MatrixFormatError(DiffusionSegError):
    """Malformed TMAT transition matrix file"""


class SeedError(DiffusionSegError):
    """Invalid seed entry or seed file"""


class SingularSystemError(DiffusionSegError):
    """The closed-form diffusion system could not be solved"""


class DegenerateGraphError(DiffusionSegError):
    """A node has zero degree where a normalization needs it positive"""


class EmptyLossError(DiffusionSegError):
    """Every node carries the ignore label"""


class MissingTraceError(DiffusionSegError):
    """Backward pass requested on a cascade run without its trace"""


class TrainingDivergedError(DiffusionSegError):
    """Loss became non-finite during training"""


class ImageFormatError(DiffusionSegError):
    """Malformed Netpbm image"""


class UnsupportedFormatError(ImageFormatError):
    """Netpbm variant other than binary P5/P6 with maxval 255"""


class TruncatedImageError(ImageFormatError):
    """Pixel payload shorter than the header announces"""


class ParameterFileError(DiffusionSegError):
    """Malformed trained-parameter text file"""
