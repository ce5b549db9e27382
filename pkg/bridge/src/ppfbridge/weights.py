"""Pretrained-weight fetching with pinned checksums.

Extraction itself is offline: ``fetch-weights`` downloads a TorchScript
archive for one extractor into the weights directory, verifies its sha256
against the registry pin, and records it in a lockfile. Entries without a
pinned checksum are refused unless ``--allow-unpinned`` is passed, in
which case the computed digest is recorded so later fetches are pinned.

The shipped registry intentionally carries no artifact URLs: upstream
releases are not distributed as TorchScript, so each deployment exports
its own archives (see the module convention in extractors/torchscript.py)
and points the registry at them.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
import urllib.request
from pathlib import Path

from .extractors.base import EXTRACTOR_NAMES

# name -> {"url": str | None, "sha256": str | None}
BUILTIN_REGISTRY: dict[str, dict] = {
    name: {"url": None, "sha256": None} for name in EXTRACTOR_NAMES if name != "orb"
}


class WeightsError(Exception):
    pass


def default_weights_dir() -> Path:
    base = os.environ.get("PPFBRIDGE_WEIGHTS_DIR")
    if base:
        return Path(base)
    return Path.home() / ".cache" / "ppfbridge" / "weights"


def load_registry(path: str | Path | None) -> dict[str, dict]:
    registry = {k: dict(v) for k, v in BUILTIN_REGISTRY.items()}
    if path is not None:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        for name, entry in doc.items():
            registry.setdefault(name, {}).update(entry)
    return registry


def sha256_of(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _lock_path(weights_dir: Path) -> Path:
    return weights_dir / "weights.lock.json"


def _read_lock(weights_dir: Path) -> dict:
    lock = _lock_path(weights_dir)
    if lock.is_file():
        return json.loads(lock.read_text(encoding="utf-8"))
    return {}


def _write_lock(weights_dir: Path, lock: dict) -> None:
    _lock_path(weights_dir).write_text(
        json.dumps(lock, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def fetch_weights(
    extractor: str,
    weights_dir: str | Path | None = None,
    registry_path: str | Path | None = None,
    allow_unpinned: bool = False,
) -> Path:
    """Download and verify one extractor's TorchScript archive.

    Returns the path of the verified file. Raises WeightsError when the
    extractor needs no weights, has no registry entry, or fails the pin.
    """
    if extractor == "orb":
        raise WeightsError("orb is weight-free; nothing to fetch")
    registry = load_registry(registry_path)
    entry = registry.get(extractor)
    if entry is None or not entry.get("url"):
        raise WeightsError(
            f"no artifact registered for {extractor!r}; this build ships no "
            "TorchScript exports of the upstream networks. Export one per the "
            "convention in ppfbridge/extractors/torchscript.py and register "
            "its url+sha256 via --registry."
        )
    pinned = entry.get("sha256")
    if pinned is None and not allow_unpinned:
        raise WeightsError(
            f"registry entry for {extractor!r} has no pinned sha256; refusing "
            "to trust the download (pass --allow-unpinned to pin on first fetch)"
        )

    weights_dir = Path(weights_dir) if weights_dir else default_weights_dir()
    weights_dir.mkdir(parents=True, exist_ok=True)
    dest = weights_dir / f"{extractor}.pt"

    fd, tmp = tempfile.mkstemp(dir=weights_dir, prefix=dest.name + ".", suffix=".tmp")
    os.close(fd)
    tmp_path = Path(tmp)
    try:
        with urllib.request.urlopen(entry["url"]) as resp, tmp_path.open("wb") as out:
            shutil.copyfileobj(resp, out)
        digest = sha256_of(tmp_path)
        if pinned is not None and digest != pinned:
            raise WeightsError(
                f"checksum mismatch for {extractor!r}: expected {pinned}, got {digest}"
            )
        from .ppfio import _UMASK

        os.chmod(tmp_path, 0o666 & ~_UMASK)
        os.replace(tmp_path, dest)
    finally:
        if tmp_path.exists():
            tmp_path.unlink()

    lock = _read_lock(weights_dir)
    lock[extractor] = {"url": entry["url"], "sha256": digest}
    _write_lock(weights_dir, lock)
    return dest
