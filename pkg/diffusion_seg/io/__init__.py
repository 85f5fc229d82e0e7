"""File formats: Netpbm images, run manifests and atomic writes"""

from .atomic import atomic_write_bytes, atomic_write_text
from .manifest import RunManifest, read_manifest
from .netpbm import (
    encode_netpbm,
    image_to_pixels,
    read_image,
    read_netpbm,
    read_pgm,
    write_image,
    write_netpbm,
)

__all__ = [
    "RunManifest",
    "atomic_write_bytes",
    "atomic_write_text",
    "encode_netpbm",
    "image_to_pixels",
    "read_image",
    "read_manifest",
    "read_netpbm",
    "read_pgm",
    "write_image",
    "write_netpbm",
]
