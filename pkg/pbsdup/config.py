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
"""Release information and runtime settings."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
import json
import logging
import os
from pathlib import Path
from typing import Any, Mapping, Optional


major = 1
minor = 0
beta = 0
beta_str = "-beta{}".format(beta) if beta > 0 else ""
release = "{}.{}{}".format(major, minor, beta_str)

ENV_PREFIX = "PBSDUP_"

MiB = 1024 * 1024


def logger() -> logging.Logger:
    """Returns the module logger."""
    return logging.getLogger(__name__)


@dataclass(frozen=True)
class Settings:
    """Tunables shared by the client, the service and the evaluation tools.

    Defaults: 12 PBS characters, 8-word seeds, a 12-word reporting threshold
    and mismatch gaps of up to 3 words.
    """

    alphabet_size: int = 12
    seed_k: int = 8
    min_report: int = 12
    max_gap: int = 3
    occ_rate: int = 128
    sa_rate: int = 32
    server: str = "http://127.0.0.1:8080"
    port: int = 8080
    db: Optional[str] = None
    max_search_body: int = 16 * MiB
    max_zip_body: int = 128 * MiB
    async_threshold: float = 0.0
    workers: int = 4

    def __post_init__(self) -> None:
        if not 1 <= self.alphabet_size <= 26:
            raise ValueError(f"alphabet_size must be in 1..26: {self.alphabet_size}")
        if self.seed_k < 1:
            raise ValueError(f"seed_k must be positive: {self.seed_k}")
        if self.min_report < 1:
            raise ValueError(f"min_report must be positive: {self.min_report}")
        if self.max_gap < 0:
            raise ValueError(f"max_gap must not be negative: {self.max_gap}")
        if self.occ_rate < 1 or self.sa_rate < 1:
            raise ValueError("sampling rates must be positive")
        if self.workers < 1:
            raise ValueError(f"workers must be positive: {self.workers}")

    def replace(self, **changes: Any) -> Settings:
        """Returns a copy with the non-None values of changes applied."""
        return dataclasses.replace(
            self, **{k: v for k, v in changes.items() if v is not None}
        )

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> Settings:
        known = {f.name: f for f in dataclasses.fields(cls)}
        kwargs: dict[str, Any] = {}
        for key, value in values.items():
            if key not in known:
                logger().warning("Ignoring unknown setting %s", key)
                continue
            kwargs[key] = value
        return cls(**kwargs)

    @classmethod
    def load(
        cls, path: Optional[Path] = None, environ: Optional[Mapping[str, str]] = None
    ) -> Settings:
        """Loads settings from a JSON file, then applies PBSDUP_* overrides.

        Args:
            path: JSON file with a flat object of settings. Optional.
            environ: Environment to read overrides from. Defaults to os.environ.
        """
        values: dict[str, Any] = {}
        if path is not None:
            with open(path) as config_file:
                loaded = json.load(config_file)
            if not isinstance(loaded, dict):
                raise ValueError(f"{path}: expected a JSON object")
            values.update(loaded)

        if environ is None:
            environ = os.environ
        for field in dataclasses.fields(cls):
            env_name = ENV_PREFIX + field.name.upper()
            if env_name not in environ:
                continue
            values[field.name] = _coerce(field.type, environ[env_name])
        return cls.from_mapping(values)


def _coerce(type_name: Any, raw: str) -> Any:
    # Field types are strings under postponed evaluation of annotations.
    type_str = str(type_name)
    if type_str == "int":
        return int(raw)
    if type_str == "float":
        return float(raw)
    return raw


if __name__ == "__main__":
    print(release)
