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
"""Timer APIs."""
from __future__ import annotations

import timeit
from types import TracebackType
from typing import Optional, Type


class Timer:
    """Wall-clock timer with sub-second resolution.

    Can be used explicitly with start/finish, but preferably is used as a
    context manager:

    >>> timer = Timer()
    >>> with timer:
    ...     pass
    >>> timer.seconds >= 0.0
    True
    """

    def __init__(self) -> None:
        self.start_time: Optional[float] = None
        self.end_time: Optional[float] = None

    def start(self) -> None:
        self.start_time = timeit.default_timer()
        self.end_time = None

    def finish(self) -> None:
        assert self.start_time is not None
        self.end_time = timeit.default_timer()

    @property
    def seconds(self) -> float:
        """Elapsed time; keeps running until finish() is called."""
        if self.start_time is None:
            return 0.0
        end = self.end_time if self.end_time is not None else timeit.default_timer()
        return end - self.start_time

    def __enter__(self) -> Timer:
        self.start()
        return self

    def __exit__(
        self,
        _exc_type: Optional[Type[BaseException]],
        _exc_value: Optional[BaseException],
        _traceback: Optional[TracebackType],
    ) -> None:
        self.finish()

    def __str__(self) -> str:
        return f"{self.seconds:.3f}s"
