"""Persistence of clouds (GSPL binary), images (8-bit PNG) and dataset bundle directories.

Cloud file layout, little endian: magic b"GSPL", version u16, count u64, then 14 float64
per splat (3 position, 3 log_scales, 4 quaternion wxyz, 3 color, 1 opacity_logit).

NO try-catch blocks - let decoding errors bubble up with their byte offsets.
"""

import json
import logging
import struct
from pathlib import Path

import numpy as np
from PIL import Image
from pydantic import TypeAdapter

from gsdefend.core.errors import DimensionMismatchError, MissingArtifactError, ParseError, UnsupportedVersionError
from gsdefend.core.models import BYTES_PER_SPLAT, FORMAT_VERSION, BundleMetadata, CameraRecord, load_json
from gsdefend.scene.types import SPLAT_FIELDS, Camera, DatasetBundle, GaussianCloud, ImageBuffer

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

MAGIC = b"GSPL"
HEADER = struct.Struct("<4sHQ")

CAMERAS_FILE = "cameras.json"
METADATA_FILE = "bundle.json"

_camera_list = TypeAdapter(list[CameraRecord])


def encode_cloud(cloud: GaussianCloud) -> bytes:
    return HEADER.pack(MAGIC, FORMAT_VERSION, len(cloud)) + cloud.as_matrix().astype("<f8").tobytes()


def decode_cloud(data: bytes) -> GaussianCloud:
    """
    Decode a GSPL blob.

    Raises:
        ParseError: On a short header, bad magic, truncated splat data or trailing bytes
        UnsupportedVersionError: On a version other than FORMAT_VERSION
    """
    if len(data) < HEADER.size:
        raise ParseError(f"truncated header: {len(data)} of {HEADER.size} bytes", offset=len(data))
    magic, version, count = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ParseError(f"bad magic {magic!r}", offset=0)
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported cloud format version {version}", offset=4)

    expected = HEADER.size + count * BYTES_PER_SPLAT
    if len(data) < expected:
        complete = (len(data) - HEADER.size) // BYTES_PER_SPLAT
        raise ParseError(
            f"truncated splat data: {complete} of {count} splats", offset=HEADER.size + complete * BYTES_PER_SPLAT
        )
    if len(data) > expected:
        raise ParseError(f"{len(data) - expected} trailing bytes after {count} splats", offset=expected)

    values = np.frombuffer(data, dtype="<f8", count=count * SPLAT_FIELDS, offset=HEADER.size)
    return GaussianCloud.from_matrix(values.astype(np.float64))


def save_cloud(cloud: GaussianCloud, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_cloud(cloud))
    logger.info(f"Saved {len(cloud)} splats to {path}")


def load_cloud(path: Path) -> GaussianCloud:
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(f"cloud file not found: {path}")
    return decode_cloud(path.read_bytes())


def save_image(image: ImageBuffer, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(image.to_uint8()).save(path, format="PNG")


def load_image(path: Path) -> ImageBuffer:
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(f"image not found: {path}")
    with Image.open(path) as img:
        return ImageBuffer.from_uint8(np.asarray(img.convert("RGB")))


def camera_to_record(camera: Camera, split: str) -> CameraRecord:
    return CameraRecord(
        fx=camera.fx,
        fy=camera.fy,
        cx=camera.cx,
        cy=camera.cy,
        rotation=camera.rotation.reshape(-1).tolist(),
        translation=camera.translation.tolist(),
        width=camera.width,
        height=camera.height,
        split=split,
    )


def record_to_camera(record: CameraRecord) -> Camera:
    return Camera(
        fx=record.fx,
        fy=record.fy,
        cx=record.cx,
        cy=record.cy,
        rotation=np.array(record.rotation).reshape(3, 3),
        translation=np.array(record.translation),
        width=record.width,
        height=record.height,
    )


def _image_name(split: str, index: int) -> str:
    return f"{split}_{index:03d}.png"


def save_bundle(bundle: DatasetBundle, directory: Path) -> None:
    """
    Write a bundle directory: train_XXX.png / test_XXX.png, cameras.json and bundle.json.

    cameras.json lists train cameras in order, then test cameras; the n-th record of a split
    belongs to the n-th image of that split.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    records = []
    for split, views in (("train", bundle.train_views), ("test", bundle.test_views)):
        for index, (camera, image) in enumerate(views):
            save_image(image, directory / _image_name(split, index))
            records.append(camera_to_record(camera, split))

    (directory / CAMERAS_FILE).write_text(_camera_list.dump_json(records, indent=2).decode())
    (directory / METADATA_FILE).write_text(bundle.metadata.model_dump_json(indent=2))
    logger.info(f"Saved bundle ({len(bundle.train_views)} train, {len(bundle.test_views)} test) to {directory}")


def load_bundle(directory: Path) -> DatasetBundle:
    """
    Read a bundle directory written by save_bundle.

    Raises:
        MissingArtifactError: If the directory, cameras.json, bundle.json or an image is absent
        ValidationError: If cameras.json or bundle.json violates its schema
        DimensionMismatchError: If an image does not match its camera's dimensions
    """
    directory = Path(directory)
    for required in (directory / CAMERAS_FILE, directory / METADATA_FILE):
        if not required.is_file():
            raise MissingArtifactError(f"bundle file not found: {required}")

    records = _camera_list.validate_python(json.loads((directory / CAMERAS_FILE).read_text()))
    metadata = load_json(directory / METADATA_FILE, BundleMetadata)

    views: dict[str, list] = {"train": [], "test": []}
    for record in records:
        split_views = views[record.split]
        image = load_image(directory / _image_name(record.split, len(split_views)))
        if image.shape != (record.height, record.width):
            raise DimensionMismatchError(
                f"{_image_name(record.split, len(split_views))} is {image.shape}, camera expects "
                f"{(record.height, record.width)}"
            )
        split_views.append((record_to_camera(record), image))

    return DatasetBundle(train_views=views["train"], test_views=views["test"], metadata=metadata)
