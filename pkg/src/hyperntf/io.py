"""Reading and writing tensor and label files.

TNSR binary layout (little endian)::

    bytes 0-3   magic b"TNSR"
    byte  4     version (1)
    byte  5     order N
    bytes 6-7   reserved, zero
    8*N bytes   dims, uint64
    8*prod(dims) bytes  float64 values, first index fastest

CSV matrices hold one sample per row. An order-2 tensor read from CSV has
shape ``(features, samples)`` so the sample mode is last; ``sample_shape``
reshapes each row (first index fastest) into a higher-order sample.
"""
import os
import struct
import tempfile

import numpy as np

from .errors import FormatError, TruncationError
from .tensor import as_tensor, check_nonnegative, unfold

MAGIC = b"TNSR"
VERSION = 1
IDX_IMAGES = 0x00000803
IDX_LABELS = 0x00000801
FLOAT_FMT = "%.17g"


def atomic_write(path, data):
    """Write ``data`` (bytes or str) via a temporary file and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def encode_tensor(t):
    t = as_tensor(t)
    if t.ndim > 255:
        raise FormatError("TNSR supports at most 255 modes")
    header = MAGIC + struct.pack("<BBH", VERSION, t.ndim, 0)
    header += struct.pack(f"<{t.ndim}Q", *t.shape)
    return header + np.ravel(t, order="F").astype("<f8").tobytes()


def decode_tensor(buf):
    if len(buf) < 8:
        raise TruncationError("file shorter than the TNSR header", offset=len(buf))
    if buf[:4] != MAGIC:
        raise FormatError(f"bad magic {bytes(buf[:4])!r}", offset=0)
    version, order, reserved = struct.unpack_from("<BBH", buf, 4)
    if version != VERSION:
        raise FormatError(f"unsupported TNSR version {version}", offset=4)
    if order < 1:
        raise FormatError("tensor order must be >= 1", offset=5)
    if reserved != 0:
        raise FormatError("reserved header bytes must be zero", offset=6)
    dims_end = 8 + 8 * order
    if len(buf) < dims_end:
        raise TruncationError("file ends inside the dimension list", offset=len(buf))
    dims = struct.unpack_from(f"<{order}Q", buf, 8)
    if any(d == 0 for d in dims):
        raise FormatError("zero extent in dimension list", offset=8)
    count = int(np.prod(dims, dtype=object))
    expected = dims_end + 8 * count
    if len(buf) < expected:
        raise TruncationError(
            f"payload has {len(buf) - dims_end} bytes, dims {dims} need {8 * count}",
            offset=len(buf),
        )
    if len(buf) > expected:
        raise FormatError(f"{len(buf) - expected} trailing bytes after payload", offset=expected)
    data = np.frombuffer(buf, dtype="<f8", count=count, offset=dims_end)
    return data.astype(np.float64).reshape(dims, order="F")


def save_tensor(path, t):
    atomic_write(path, encode_tensor(t))


def _read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


def read_csv_matrix(path):
    """Parse a numeric CSV; a non-numeric first row is returned as the header."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    header = None
    if lines:
        first = lines[0].split(",")
        try:
            [float(v) for v in first]
        except ValueError:
            header = [v.strip() for v in first]
            lines = lines[1:]
    if not lines:
        raise FormatError(f"{path}: no numeric rows")
    rows = []
    width = None
    for i, ln in enumerate(lines):
        fields = ln.split(",")
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise FormatError(f"{path}: row {i + 1} has {len(fields)} fields, expected {width}")
        try:
            rows.append([float(v) for v in fields])
        except ValueError as exc:
            raise FormatError(f"{path}: row {i + 1}: {exc}") from None
    return header, np.array(rows, dtype=np.float64)


def format_csv(matrix, header=None):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    out = []
    if header is not None:
        out.append(",".join(header))
    for row in matrix:
        out.append(",".join(FLOAT_FMT % v for v in row))
    return "\n".join(out) + "\n"


def save_csv_matrix(path, matrix, header=None):
    atomic_write(path, format_csv(matrix, header))


def is_tnsr(path):
    with open(path, "rb") as fh:
        return fh.read(4) == MAGIC


def load_tensor(path, nonnegative=False, sample_shape=None):
    """Read a TNSR file, or a CSV matrix with one sample per row.

    Parameters
    ----------
    path : str or path-like
    nonnegative : bool
        Reject tensors with negative entries (DataError naming the index).
    sample_shape : sequence of int, optional
        CSV only: reshape each row into this shape; the result is
        ``(*sample_shape, n_rows)``.
    """
    path = os.fspath(path)
    if is_tnsr(path):
        t = decode_tensor(_read_bytes(path))
    else:
        _, rows = read_csv_matrix(path)
        if sample_shape:
            sample_shape = tuple(int(s) for s in sample_shape)
            if int(np.prod(sample_shape)) != rows.shape[1]:
                raise FormatError(
                    f"{path}: rows have {rows.shape[1]} values, sample shape {sample_shape} needs "
                    f"{int(np.prod(sample_shape))}"
                )
            t = rows.T.reshape(sample_shape + (rows.shape[0],), order="F")
        else:
            t = rows.T.copy()
    if nonnegative:
        check_nonnegative(t, os.path.basename(path))
    return t


def tensor_to_csv_rows(t):
    """One row per sample (last mode), each sample vectorized first index fastest."""
    t = as_tensor(t)
    if t.ndim == 1:
        return t[:, None]
    return unfold(t, t.ndim - 1)


def _read_idx_header(buf, expected_magic, path):
    if len(buf) < 8:
        raise TruncationError(f"{path}: shorter than an IDX header", offset=len(buf))
    magic, count = struct.unpack_from(">II", buf, 0)
    if magic != expected_magic:
        raise FormatError(f"{path}: IDX magic {magic:#010x}, expected {expected_magic:#010x}", offset=0)
    return count


def read_idx_images(path):
    buf = _read_bytes(path)
    count = _read_idx_header(buf, IDX_IMAGES, path)
    if len(buf) < 16:
        raise TruncationError(f"{path}: IDX image header truncated", offset=len(buf))
    rows, cols = struct.unpack_from(">II", buf, 8)
    need = 16 + count * rows * cols
    if len(buf) != need:
        raise TruncationError(f"{path}: expected {need} bytes, found {len(buf)}", offset=len(buf))
    return np.frombuffer(buf, dtype=np.uint8, offset=16).reshape(count, rows, cols)


def read_idx_labels(path):
    buf = _read_bytes(path)
    count = _read_idx_header(buf, IDX_LABELS, path)
    if len(buf) != 8 + count:
        raise TruncationError(f"{path}: expected {8 + count} bytes, found {len(buf)}", offset=len(buf))
    return np.frombuffer(buf, dtype=np.uint8, offset=8).astype(np.int64)


def import_idx(images_path, labels_path, limit=None, seed=0):
    """Load IDX images and labels as a ``rows x cols x M`` tensor in [0, 1].

    With ``limit`` smaller than the file count, ``limit`` items are drawn
    without replacement using ``seed`` (kept in file order).
    """
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise FormatError(
            f"image count {images.shape[0]} does not match label count {labels.shape[0]}"
        )
    count = images.shape[0]
    if limit is not None and limit < count:
        idx = np.sort(np.random.default_rng(seed).choice(count, size=limit, replace=False))
        images, labels = images[idx], labels[idx]
    t = np.transpose(images, (1, 2, 0)).astype(np.float64) / 255.0
    return t, labels


def is_idx(path, magic):
    with open(path, "rb") as fh:
        head = fh.read(4)
    return len(head) == 4 and struct.unpack(">I", head)[0] == magic


def load_labels(path):
    """Integer labels from an IDX label file or a one-column text/CSV file."""
    path = os.fspath(path)
    if is_idx(path, IDX_LABELS):
        return read_idx_labels(path)
    _, rows = read_csv_matrix(path)
    if rows.shape[1] != 1:
        raise FormatError(f"{path}: label file must have a single column")
    vals = rows[:, 0]
    if np.any(vals != np.round(vals)) or np.any(vals < 0):
        raise FormatError(f"{path}: labels must be nonnegative integers")
    return vals.astype(np.int64)
