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
"""Helper functions for package resources and corpus directories."""
import os
from pathlib import Path
from typing import Callable, Iterator, List, Optional


PACKAGE_DIR = Path(__file__).resolve().parent
TEXT_SUFFIXES = (".txt", ".text", ".md")


def package_path(*args: str) -> Path:
    """Returns the absolute path of a file shipped inside the package."""
    return PACKAGE_DIR.joinpath(*args)


def data_path(*args: str) -> Path:
    return package_path("data", *args)


def templates_dir() -> Path:
    return package_path("templates")


def walk(
    path: Path,
    top_down: bool = True,
    on_error: Optional[Callable[[OSError], None]] = None,
    follow_links: bool = False,
    directories: bool = True,
) -> Iterator[Path]:
    """Recursively iterates through files in a directory.

    A pathlib flavour of os.walk.

    Args:
        path: Directory tree to walk.
        top_down: If True, walk the tree top-down, otherwise bottom-up.
        on_error: Callback for any OSError raised by the walk.
        follow_links: If True, walk into symbolic links to directories.
        directories: If True, directories are yielded as well as files.
    """
    for root, dirs, files in os.walk(
        str(path), topdown=top_down, onerror=on_error, followlinks=follow_links
    ):
        root_path = Path(root)
        if directories:
            for dir_name in dirs:
                yield root_path / dir_name
        for file_name in files:
            yield root_path / file_name


def text_files(root: Path, suffixes: tuple[str, ...] = TEXT_SUFFIXES) -> List[Path]:
    """Plain-text files below root in a stable order.

    A path to a single file is returned as is.
    """
    if root.is_file():
        return [root]
    if not root.is_dir():
        raise FileNotFoundError(f"No such file or directory: {root}")
    return sorted(
        p
        for p in walk(root, directories=False)
        if p.suffix.lower() in suffixes and not p.name.startswith(".")
    )
