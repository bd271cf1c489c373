"""Reading and writing embedding matrices as CSV, NPY, or raw float32 with a JSON sidecar.

RAW files are packed little-endian float32 in row-major order; the shape lives
in ``<file>.json`` as ``{"n": ..., "d": ...}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib import format as npformat

from .core import SampleSet
from .errors import InvalidArgument, ParseError

FORMATS = ("csv", "npy", "raw")
_EXT = {".csv": "csv", ".txt": "csv", ".npy": "npy", ".raw": "raw", ".bin": "raw", ".f32": "raw"}


@dataclass(frozen=True)
class EmbeddingFile:
    path: Path
    format: str | None = None
    n: int | None = None
    d: int | None = None

    def resolved_format(self) -> str:
        fmt = self.format or _EXT.get(Path(self.path).suffix.lower())
        if fmt not in FORMATS:
            raise ParseError(f"{self.path}: cannot infer format from extension; pass one of {FORMATS}")
        return fmt


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def _finite_or_raise(arr: np.ndarray, path: Path, row_offset: int = 0) -> None:
    bad = ~np.isfinite(arr)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise ParseError(f"{path}: non-finite value at row {int(r) + row_offset}, column {int(c)}")


def _read_csv(path: Path) -> np.ndarray:
    rows: list[list[float]] = []
    width = None
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            fields = text.split(",")
            try:
                vals = [float(f) for f in fields]
            except ValueError:
                if not rows and lineno == 1:
                    continue  # header
                raise ParseError(f"{path}: row {lineno}: non-numeric field") from None
            if width is None:
                width = len(vals)
            elif len(vals) != width:
                raise ParseError(f"{path}: row {lineno}: expected {width} fields, got {len(vals)}")
            if not all(np.isfinite(vals)):
                raise ParseError(f"{path}: row {lineno}: non-finite value")
            rows.append(vals)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def _read_npy(path: Path) -> np.ndarray:
    with path.open("rb") as fh:
        try:
            version = npformat.read_magic(fh)
        except ValueError as exc:
            raise ParseError(f"{path}: offset 0: not an NPY file ({exc})") from exc
        if version not in ((1, 0), (2, 0)):
            raise ParseError(f"{path}: offset 6: unsupported NPY version {version}")
        try:
            if version == (1, 0):
                shape, fortran, dtype = npformat.read_array_header_1_0(fh)
            else:
                shape, fortran, dtype = npformat.read_array_header_2_0(fh)
        except ValueError as exc:
            raise ParseError(f"{path}: offset 8: bad NPY header ({exc})") from exc
        start = fh.tell()
        if fortran:
            raise ParseError(f"{path}: offset 8: Fortran-ordered arrays are not supported")
        if dtype not in (np.dtype("<f4"), np.dtype("<f8")):
            raise ParseError(f"{path}: offset 8: unsupported dtype {dtype.str}; need little-endian float32/float64")
        if len(shape) != 2:
            raise ParseError(f"{path}: offset 8: expected a 2-D array, got shape {shape}")
        data = fh.read()
    need = int(np.prod(shape)) * dtype.itemsize
    if len(data) != need:
        raise ParseError(f"{path}: offset {start}: expected {need} data bytes for shape {shape}, found {len(data)}")
    arr = np.frombuffer(data, dtype=dtype).reshape(shape)
    _finite_or_raise(arr, path)
    return arr


def _read_raw(path: Path) -> np.ndarray:
    side = sidecar_path(path)
    try:
        meta = json.loads(side.read_text())
        n, d = int(meta["n"]), int(meta["d"])
    except OSError as exc:
        raise ParseError(f"{side}: missing sidecar ({exc})") from exc
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{side}: sidecar must be {{\"n\": int, \"d\": int}} ({exc})") from exc
    data = path.read_bytes()
    need = n * d * 4
    if len(data) != need:
        raise ParseError(f"{path}: offset {min(len(data), need)}: expected {need} bytes for n={n}, d={d}, found {len(data)}")
    arr = np.frombuffer(data, dtype="<f4").reshape(n, d)
    bad = ~np.isfinite(arr)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise ParseError(f"{path}: offset {4 * (int(r) * d + int(c))}: non-finite value (row {int(r)})")
    return arr


def read_embeddings(file: EmbeddingFile | str | Path, label: str | None = None) -> SampleSet:
    ef = file if isinstance(file, EmbeddingFile) else EmbeddingFile(Path(file))
    path = Path(ef.path)
    if not path.exists():
        raise ParseError(f"{path}: no such file")
    fmt = ef.resolved_format()
    arr = {"csv": _read_csv, "npy": _read_npy, "raw": _read_raw}[fmt](path)
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ParseError(f"{path}: empty matrix of shape {arr.shape}")
    if (ef.n is not None and arr.shape[0] != ef.n) or (ef.d is not None and arr.shape[1] != ef.d):
        raise ParseError(f"{path}: shape {arr.shape} does not match declared ({ef.n}, {ef.d})")
    return SampleSet(arr, label if label is not None else path.stem)


def write_embeddings(s: SampleSet | np.ndarray, path: str | Path, format: str | None = None) -> Path:
    if not isinstance(s, SampleSet):
        s = SampleSet(np.asarray(s))
    path = Path(path)
    fmt = EmbeddingFile(path, format).resolved_format()
    path.parent.mkdir(parents=True, exist_ok=True)
    x = s.points
    if fmt == "csv":
        with path.open("w") as fh:
            for row in x:
                fh.write(",".join(format_float(v) for v in row) + "\n")
    elif fmt == "npy":
        arr = np.ascontiguousarray(x, dtype=x.dtype.newbyteorder("<"))
        with path.open("wb") as fh:
            npformat.write_array(fh, arr, allow_pickle=False)
    elif fmt == "raw":
        if x.dtype != np.float32 and not np.array_equal(x.astype(np.float32), x):
            raise InvalidArgument("raw format stores float32; values would lose precision")
        path.write_bytes(np.ascontiguousarray(x, dtype="<f4").tobytes())
        sidecar_path(path).write_text(json.dumps({"n": s.n, "d": s.d}) + "\n")
    return path


def format_float(v: float) -> str:
    return "%.17g" % float(v)
