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
"""Runs encoding and evaluation tasks serially or on worker processes.

A task is a module-level callable taking the executing worker first and the
queued arguments after it. Every result comes back tagged with the position
its task was queued at, so callers can restore input order.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
import collections
from dataclasses import dataclass
import logging
import multiprocessing
import os
from queue import Queue
import signal
import sys
import traceback
from types import FrameType, TracebackType
from typing import (
    Any,
    Callable,
    Deque,
    Generic,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Type,
    TypeVar,
    Union,
)


ResultT = TypeVar("ResultT")


def logger() -> logging.Logger:
    """Returns the module logger."""
    return logging.getLogger(__name__)


def worker_sigterm_handler(_signum: int, _frame: Optional[FrameType]) -> None:
    """Raises SystemExit so finally blocks in the worker still run."""
    sys.exit()


class TaskError(Exception):
    """An exception raised by a task, re-raised in the process that queued it.

    The message is the formatted traceback of the original exception.
    """


def _format_current_exception() -> str:
    return "".join(traceback.format_exception(*sys.exc_info()))


@dataclass(frozen=True)
class Task:
    index: int
    func: Callable[..., Any]
    args: Tuple[Any, ...]

    def run(self, worker: Any) -> Any:
        return self.func(worker, *self.args)


class TaskResult(NamedTuple):
    index: int
    value: Any


class SerialWorker:
    """The worker handed to tasks that run in the calling process."""


class PoolWorker:
    """A worker process running queued tasks until told to stop.

    A None task is the stop signal. A task that raises ends the worker after
    its TaskError has been queued.
    """

    def __init__(
        self,
        tasks: Queue[Optional[Task]],
        results: Queue[Union[TaskResult, TaskError]],
    ) -> None:
        self.tasks = tasks
        self.results = results
        self.process = multiprocessing.Process(target=self.main)

    @property
    def pid(self) -> Optional[int]:
        return self.process.pid

    def main(self) -> None:
        signal.signal(signal.SIGTERM, worker_sigterm_handler)
        pid = os.getpid()
        try:
            while (task := self.tasks.get()) is not None:
                logger().debug("worker %d: task %d", pid, task.index)
                self.results.put(TaskResult(task.index, task.run(self)))
        except SystemExit:
            pass
        except:  # pylint: disable=bare-except
            logger().debug("worker %d: task raised", pid)
            self.results.put(TaskError(_format_current_exception()))


class BaseWorkQueue(ABC, Generic[ResultT]):
    """Usable as a context manager that closes the queue on exit."""

    def __init__(self) -> None:
        self.num_tasks = 0
        self._queued = 0

    def add_task(self, func: Callable[..., ResultT], *args: Any) -> None:
        """Queues func(worker, *args)."""
        self._enqueue(Task(self._queued, func, args))
        self._queued += 1
        self.num_tasks += 1

    @abstractmethod
    def _enqueue(self, task: Task) -> None:
        ...

    @abstractmethod
    def next_result(self) -> TaskResult:
        """Blocks until a task completes.

        Raises:
            TaskError: The task raised an exception.
        """

    def get_result(self) -> ResultT:
        """The value of the next completed task."""
        return self.next_result().value  # type: ignore[no-any-return]

    def finished(self) -> bool:
        return self.num_tasks == 0

    def close(self) -> None:
        """Stops the workers, if any."""

    def __enter__(self) -> BaseWorkQueue[ResultT]:
        return self

    def __exit__(
        self,
        _exc_type: Optional[Type[BaseException]],
        _exc_value: Optional[BaseException],
        _traceback: Optional[TracebackType],
    ) -> None:
        self.close()


class SerialWorkQueue(BaseWorkQueue[ResultT]):
    """Runs each task in the calling process when its result is requested."""

    def __init__(self) -> None:
        super().__init__()
        self.pending: Deque[Task] = collections.deque()

    def _enqueue(self, task: Task) -> None:
        self.pending.append(task)

    def next_result(self) -> TaskResult:
        task = self.pending.popleft()
        self.num_tasks -= 1
        try:
            return TaskResult(task.index, task.run(SerialWorker()))
        except Exception as ex:
            raise TaskError(_format_current_exception()) from ex


class ProcessPoolWorkQueue(BaseWorkQueue[ResultT]):
    """A fixed pool of worker processes sharing one task queue.

    Tasks and their results must be picklable. Workers that do not exit
    within join_timeout seconds of close() are killed.
    """

    join_timeout = 8

    def __init__(self, num_workers: int) -> None:
        super().__init__()
        if num_workers < 1:
            raise ValueError(f"num_workers must be positive: {num_workers}")
        self.manager = multiprocessing.Manager()
        self.tasks: Queue[Optional[Task]] = self.manager.Queue()
        self.results: Queue[Union[TaskResult, TaskError]] = self.manager.Queue()
        self.workers: List[PoolWorker] = []
        for _ in range(num_workers):
            worker = PoolWorker(self.tasks, self.results)
            worker.process.start()
            self.workers.append(worker)
        logger().debug("started %d workers", num_workers)

    def _enqueue(self, task: Task) -> None:
        self.tasks.put(task)

    def next_result(self) -> TaskResult:
        result = self.results.get()
        if isinstance(result, TaskError):
            raise result
        self.num_tasks -= 1
        return result

    def close(self) -> None:
        for worker in self.workers:
            worker.process.terminate()
        for worker in self.workers:
            worker.process.join(self.join_timeout)
            if worker.process.is_alive() and worker.pid is not None:
                logger().error("worker %d will not exit; sending SIGKILL", worker.pid)
                os.kill(worker.pid, signal.SIGKILL)
                worker.process.join()
        self.workers = []
        self.manager.shutdown()


def make_work_queue(jobs: int) -> BaseWorkQueue[Any]:
    """A serial queue for jobs == 1, a process pool otherwise."""
    if jobs < 1:
        raise ValueError(f"jobs must be positive: {jobs}")
    if jobs == 1:
        return SerialWorkQueue()
    return ProcessPoolWorkQueue(jobs)


def run_ordered(
    func: Callable[..., ResultT], arg_tuples: Sequence[Tuple[Any, ...]], jobs: int = 1
) -> List[ResultT]:
    """Runs func once per argument tuple and returns results in input order.

    The results do not depend on jobs.

    Raises:
        TaskError: A task raised. The workers are stopped first.
    """
    results: List[Any] = [None] * len(arg_tuples)
    with make_work_queue(min(jobs, max(len(arg_tuples), 1))) as queue:
        for args in arg_tuples:
            queue.add_task(func, *args)
        while not queue.finished():
            index, value = queue.next_result()
            results[index] = value
    return results
