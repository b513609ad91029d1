"""File I/O for sequences, results, metrics and tables.

All reads go through fsspec via `get_fs(uri)`; callers see a uniform
byte-level API whatever the backend. Writes that produce result files are
atomic for local paths (temp file in the target directory, then rename), so
a killed bench worker never leaves a half-written file behind.

Images are PNG or BMP, decoded/encoded with OpenCV and exchanged as
(H, W, 3) uint8 RGB arrays.
"""

import hashlib
import os
import tempfile
from pathlib import Path
from typing import Optional

import cv2
import numpy as np

from .config import get_fs

IMAGE_SUFFIXES = (".png", ".bmp")


# =============================================================================
# URI dispatch via fsspec
# =============================================================================

def _is_local(uri: str) -> bool:
    return "://" not in uri or uri.startswith("file://")


def read_bytes(uri: str) -> Optional[bytes]:
    """Read bytes from a URI via fsspec. Returns None if not found."""
    uri = str(uri)
    fs = get_fs(uri)
    try:
        with fs.open(uri, "rb") as f:
            return f.read()
    except (FileNotFoundError, IsADirectoryError):
        return None


def write_bytes_atomic(uri: str, data: bytes) -> None:
    """Write bytes so readers see either the old file or the complete new one."""
    uri = str(uri)
    if not _is_local(uri):
        fs = get_fs(uri)
        with fs.open(uri, "wb") as f:
            f.write(data)
        return
    path = Path(uri.removeprefix("file://"))
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except Exception:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def read_text(uri: str) -> Optional[str]:
    data = read_bytes(uri)
    return None if data is None else data.decode("utf-8")


def write_text_atomic(uri: str, text: str) -> None:
    write_bytes_atomic(uri, text.encode("utf-8"))


def exists(uri: str) -> bool:
    uri = str(uri)
    return get_fs(uri).exists(uri)


def list_files(directory: str, suffixes: tuple[str, ...]) -> list[str]:
    """Files directly under `directory` with one of `suffixes`, sorted lexicographically."""
    directory = str(directory)
    fs = get_fs(directory)
    if not fs.isdir(directory):
        return []
    names = [p for p in fs.ls(directory, detail=False) if Path(p).suffix.lower() in suffixes]
    return sorted(names, key=lambda p: Path(p).name)


# =============================================================================
# Images
# =============================================================================

def read_image(uri: str) -> np.ndarray:
    """Decode a PNG/BMP file to (H, W, 3) uint8 RGB."""
    data = read_bytes(uri)
    if data is None:
        raise FileNotFoundError(uri)
    bgr = cv2.imdecode(np.frombuffer(data, dtype=np.uint8), cv2.IMREAD_COLOR)
    if bgr is None:
        raise ValueError(f"cannot decode image: {uri}")
    return cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)


def write_image(uri: str, rgb: np.ndarray) -> None:
    """Encode (H, W, 3) uint8 RGB by file suffix (.png or .bmp) and write atomically."""
    suffix = Path(str(uri)).suffix.lower()
    if suffix not in IMAGE_SUFFIXES:
        raise ValueError(f"unsupported image format {suffix!r}; use PNG or BMP")
    ok, encoded = cv2.imencode(suffix, cv2.cvtColor(np.ascontiguousarray(rgb), cv2.COLOR_RGB2BGR))
    if not ok:
        raise ValueError(f"cannot encode image: {uri}")
    write_bytes_atomic(uri, encoded.tobytes())


# =============================================================================
# Hashing
# =============================================================================

def data_hash(data: bytes) -> str:
    """Short content hash (first 16 hex chars of md5)."""
    return hashlib.md5(data).hexdigest()[:16]


def file_hash(uri: str) -> Optional[str]:
    data = read_bytes(uri)
    return None if data is None else data_hash(data)
