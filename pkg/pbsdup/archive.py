#
# Copyright (C) 2026 The pbsdup Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""Helper functions for reading and writing .zip bundles."""
import io
import logging
from pathlib import Path, PurePosixPath
from typing import List, Sequence, Tuple
import zipfile


def logger() -> logging.Logger:
    """Returns the module logger."""
    return logging.getLogger(__name__)


def make_zip(base_name: Path, root_dir: Path, paths: Sequence[str]) -> Path:
    """Creates a zip of files for upload.

    Args:
        base_name: Path (without extension) to the output archive.
        root_dir: Directory the archived paths are relative to.
        paths: Files to package, relative to root_dir. Stored in this order.
    """
    if not root_dir.is_dir():
        raise RuntimeError(f"Not a directory: {root_dir}")

    zip_file = base_name.with_suffix(".zip")
    if zip_file.exists():
        zip_file.unlink()
    with zipfile.ZipFile(zip_file, "w", compression=zipfile.ZIP_DEFLATED) as archive:
        for path in paths:
            archive.write(root_dir / path, arcname=PurePosixPath(path).as_posix())
    logger().info("Wrote %s with %d members", zip_file, len(paths))
    return zip_file


def _safe_name(name: str) -> PurePosixPath:
    member = PurePosixPath(name)
    if member.is_absolute() or ".." in member.parts:
        raise RuntimeError(f"Unsafe path in archive: {name}")
    return member


def unzip(zip_file: Path, dest_dir: Path) -> List[Path]:
    """Unzips zip_file into dest_dir and returns the extracted files."""
    if not zip_file.is_file() or zip_file.suffix != ".zip":
        raise RuntimeError(f"Not a .zip file: {zip_file}")
    if not dest_dir.is_dir():
        raise RuntimeError(f"Not a directory: {dest_dir}")

    extracted = []
    with zipfile.ZipFile(zip_file) as archive:
        for info in archive.infolist():
            if info.is_dir():
                continue
            target = dest_dir / _safe_name(info.filename)
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(archive.read(info))
            extracted.append(target)
    return extracted


def read_members(data: bytes, max_total: int = 0) -> List[Tuple[str, bytes]]:
    """Reads the files of an in-memory zip, sorted by member name.

    Args:
        data: The archive.
        max_total: Limit on the summed uncompressed size; 0 for no limit.

    Raises:
        RuntimeError: data is not a zip, holds unsafe paths or unpacks to
            more than max_total bytes.
    """
    try:
        archive = zipfile.ZipFile(io.BytesIO(data))
    except zipfile.BadZipFile as ex:
        raise RuntimeError(f"Not a zip archive: {ex}") from ex
    with archive:
        infos = sorted(
            (i for i in archive.infolist() if not i.is_dir()),
            key=lambda i: i.filename,
        )
        total = sum(i.file_size for i in infos)
        if max_total and total > max_total:
            raise RuntimeError(f"Archive unpacks to {total} bytes")
        return [(str(_safe_name(i.filename)), archive.read(i)) for i in infos]
