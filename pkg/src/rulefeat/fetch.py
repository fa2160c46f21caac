"""Checksum-verified dataset fetching.

A manifest is a plain-text file with one entry per line:

    name url sha256-checksum target-filename

Files already present in the cache with a matching checksum are kept;
anything else is downloaded and verified before being installed. A
checksum mismatch is always an error naming the offending entry, never a
silent acceptance.
"""

import hashlib
import shutil
import urllib.request
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, FetchError


@dataclass(frozen=True)
class ManifestEntry:
    name: str
    url: str
    checksum: str
    filename: str


@dataclass(frozen=True)
class FetchResult:
    name: str
    path: str
    status: str  # "cached" | "fetched"


def parse_manifest(path) -> list[ManifestEntry]:
    entries = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ConfigError(
                f"{path}:{lineno}: expected 'name url checksum filename', got {len(parts)} fields"
            )
        entries.append(ManifestEntry(*parts))
    return entries


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def fetch_entry(entry: ManifestEntry, cache_dir: Path) -> FetchResult:
    cache_dir.mkdir(parents=True, exist_ok=True)
    target = cache_dir / entry.filename
    if target.exists() and _sha256(target) == entry.checksum:
        return FetchResult(entry.name, str(target), "cached")
    tmp = target.with_suffix(target.suffix + ".part")
    try:
        with urllib.request.urlopen(entry.url) as resp, open(tmp, "wb") as out:
            shutil.copyfileobj(resp, out)
    except Exception as exc:
        tmp.unlink(missing_ok=True)
        raise FetchError(f"entry {entry.name!r}: download failed: {exc}") from exc
    got = _sha256(tmp)
    if got != entry.checksum:
        tmp.unlink(missing_ok=True)
        raise FetchError(
            f"entry {entry.name!r}: checksum mismatch (expected {entry.checksum}, got {got})"
        )
    tmp.replace(target)
    return FetchResult(entry.name, str(target), "fetched")


def fetch_datasets(manifest_path, cache_dir) -> list[FetchResult]:
    """Fetch every manifest entry into the cache; returns one result per entry."""
    entries = parse_manifest(manifest_path)
    return [fetch_entry(e, Path(cache_dir)) for e in entries]
