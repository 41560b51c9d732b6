"""Shared model persistence: a text manifest plus one float32 blob.

The manifest (manifest.txt) holds TAB-separated key/value lines: the format
version, the model kind, config.* fields, optional label.* entries, and one
"tensor<TAB>name<TAB>d0 d1 ..." line per tensor. weights.bin holds the
tensors' float32 little-endian data concatenated in manifest order.
"""

from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from ..errors import InputError, ParseError

FORMAT_VERSION = "1"
MANIFEST_NAME = "manifest.txt"
WEIGHTS_NAME = "weights.bin"

MODEL_KINDS = ("context_model", "ner", "pos", "morph_disambiguator",
               "dep_parser", "sentiment")


def save_model(directory: Union[str, Path], kind: str, config: Dict[str, str],
               tensors: Sequence[Tuple[str, np.ndarray]],
               labels: Sequence[str] = ()) -> None:
    if kind not in MODEL_KINDS:
        raise InputError(f"unknown model kind {kind!r}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = [f"format_version\t{FORMAT_VERSION}", f"kind\t{kind}"]
    for key in sorted(config):
        lines.append(f"config.{key}\t{config[key]}")
    for i, label in enumerate(labels):
        lines.append(f"label.{i}\t{label}")
    blob = bytearray()
    for name, arr in tensors:
        shape = " ".join(str(d) for d in arr.shape)
        lines.append(f"tensor\t{name}\t{shape}")
        blob += np.ascontiguousarray(arr, dtype="<f4").tobytes()
    (directory / MANIFEST_NAME).write_text("\n".join(lines) + "\n", encoding="utf-8")
    (directory / WEIGHTS_NAME).write_bytes(bytes(blob))


def load_model(directory: Union[str, Path]):
    """Returns (kind, config dict, labels list, tensors dict name -> float64 array)."""
    directory = Path(directory)
    manifest = directory / MANIFEST_NAME
    try:
        lines = manifest.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read model manifest: {exc}") from exc
    kind = None
    config: Dict[str, str] = {}
    labels: List[Tuple[int, str]] = []
    tensor_specs: List[Tuple[str, Tuple[int, ...]]] = []
    version = None
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        key = parts[0]
        if key == "format_version" and len(parts) == 2:
            version = parts[1]
        elif key == "kind" and len(parts) == 2:
            kind = parts[1]
        elif key.startswith("config.") and len(parts) == 2:
            config[key[len("config."):]] = parts[1]
        elif key.startswith("label.") and len(parts) == 2:
            try:
                labels.append((int(key[len("label."):]), parts[1]))
            except ValueError as exc:
                raise ParseError(f"bad label index in {key!r}", lineno) from exc
        elif key == "tensor" and len(parts) == 3:
            name = parts[1]
            try:
                shape = tuple(int(d) for d in parts[2].split())
            except ValueError as exc:
                raise ParseError(f"bad tensor shape {parts[2]!r}", lineno) from exc
            if name in {n for n, _ in tensor_specs}:
                raise ParseError(f"duplicate tensor {name!r}", lineno)
            tensor_specs.append((name, shape))
        else:
            raise ParseError(f"unrecognized manifest line {line!r}", lineno)
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported format version {version!r}", 1)
    if kind not in MODEL_KINDS:
        raise ParseError(f"missing or unknown model kind {kind!r}", 1)
    try:
        raw = (directory / WEIGHTS_NAME).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read model weights: {exc}") from exc
    expected = sum(int(np.prod(s)) for _, s in tensor_specs)
    if len(raw) != expected * 4:
        raise ParseError(
            f"weights blob holds {len(raw)} bytes, manifest expects {expected * 4}", 1)
    flat = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    tensors: Dict[str, np.ndarray] = {}
    offset = 0
    for name, shape in tensor_specs:
        size = int(np.prod(shape))
        tensors[name] = flat[offset:offset + size].reshape(shape)
        offset += size
    labels.sort()
    if [i for i, _ in labels] != list(range(len(labels))):
        raise ParseError("label indices are not dense from 0", 1)
    return kind, config, [name for _, name in labels], tensors
