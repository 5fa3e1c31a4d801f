"""File formats: tensor container, checkpoint bundles, and PGM images.

Tensor container (extension-agnostic, conventionally .pdt):
    magic  b"PDT1"
    u32    version (= 1), little-endian
    u32    ndim
    u64[]  dims (ndim entries)
    f64[]  payload, row-major little-endian

Multi-array bundles are a directory with a manifest.txt of "name=file"
lines, one tensor container per entry.

PGM (binary P5, 8-bit) is the visualization format: writing min-max
normalizes to [0, 255] (a constant image maps to 128); reading scales
to [0, 1].
"""

import struct
from pathlib import Path

import numpy as np

MAGIC = b"PDT1"
VERSION = 1


class DataFormatError(Exception):
    """A file does not conform to its declared format."""


def write_tensor(path, array):
    array = np.ascontiguousarray(array, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, array.ndim))
        fh.write(struct.pack(f"<{array.ndim}Q", *array.shape))
        fh.write(array.astype("<f8", copy=False).tobytes())


def read_tensor(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise DataFormatError(f"{path}: bad magic {blob[:4]!r}, expected {MAGIC!r}")
    if len(blob) < 12:
        raise DataFormatError(f"{path}: truncated header")
    version, ndim = struct.unpack_from("<II", blob, 4)
    if version != VERSION:
        raise DataFormatError(f"{path}: unsupported version {version}")
    header_end = 12 + 8 * ndim
    if len(blob) < header_end:
        raise DataFormatError(f"{path}: truncated dimension list")
    dims = struct.unpack_from(f"<{ndim}Q", blob, 12)
    count = int(np.prod(dims, dtype=np.uint64)) if ndim else 1
    payload = blob[header_end:]
    if len(payload) != 8 * count:
        raise DataFormatError(
            f"{path}: payload holds {len(payload) // 8} values, header declares {count}"
        )
    return np.frombuffer(payload, dtype="<f8").reshape(dims).copy()


def write_bundle(directory, arrays):
    """Write named arrays as <name>.pdt files plus a manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = []
    for name in sorted(arrays):
        fname = f"{name}.pdt"
        write_tensor(directory / fname, arrays[name])
        lines.append(f"{name}={fname}")
    (directory / "manifest.txt").write_text("\n".join(lines) + "\n")


def read_bundle(directory):
    directory = Path(directory)
    manifest = directory / "manifest.txt"
    if not manifest.is_file():
        raise DataFormatError(f"{directory}: no manifest.txt")
    arrays = {}
    for lineno, line in enumerate(manifest.read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if "=" not in line:
            raise DataFormatError(f"{manifest}: line {lineno} is not name=file")
        name, fname = line.split("=", 1)
        arrays[name] = read_tensor(directory / fname)
    return arrays


def write_pgm(path, image):
    """8-bit binary PGM with min-max normalization (constant maps to 128)."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError(f"PGM expects a 2D image, got shape {image.shape}")
    lo = image.min()
    hi = image.max()
    if hi > lo:
        levels = np.rint((image - lo) / (hi - lo) * 255.0)
    else:
        levels = np.full(image.shape, 128.0)
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(levels.astype(np.uint8).tobytes())


def read_pgm(path):
    """Binary P5 PGM scaled to [0, 1] floats."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:2] != b"P5":
        raise DataFormatError(f"{path}: not a binary P5 PGM")
    # header = magic, width, height, maxval as whitespace-separated tokens,
    # with '#' comments allowed between them
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DataFormatError(f"{path}: truncated PGM header")
        tokens.append(blob[start:pos])
    pos += 1  # single whitespace after maxval
    try:
        w, h, maxval = (int(t) for t in tokens)
    except ValueError:
        raise DataFormatError(f"{path}: malformed PGM header") from None
    if not 0 < maxval < 256:
        raise DataFormatError(f"{path}: only 8-bit PGM supported, maxval {maxval}")
    data = blob[pos : pos + w * h]
    if len(data) != w * h:
        raise DataFormatError(f"{path}: expected {w * h} pixels, found {len(data)}")
    return np.frombuffer(data, dtype=np.uint8).reshape(h, w) / float(maxval)


def read_image(path):
    """Read either a tensor container or a PGM, by sniffing the magic."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == MAGIC:
        arr = read_tensor(path)
        if arr.ndim != 2:
            raise DataFormatError(f"{path}: expected a 2D tensor, got ndim {arr.ndim}")
        return arr
    if magic[:2] == b"P5":
        return read_pgm(path)
    raise DataFormatError(f"{path}: neither a tensor container nor a P5 PGM")
