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
"""HTTP search service over a loaded corpus database.

The service only ever sees encoded sequences and only ever answers with word
positions. Handlers log sizes, counts and timings, never sequences.
"""
from __future__ import annotations

from concurrent.futures import Future, ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeoutError
import enum
import logging
import threading
from typing import Any, Callable, Dict, List, Optional, Tuple
import uuid

from flask import Flask, current_app, jsonify, request
from flask.typing import ResponseReturnValue
from werkzeug.exceptions import HTTPException

from pbsdup import archive, detector
from pbsdup.config import Settings
from pbsdup.corpus import CorpusDb
from pbsdup.encoder import Alphabet, PbsDocument, read_fasta
from pbsdup.errors import PbsError, UsageError, ValidationError
from pbsdup.timer import Timer


API_PREFIX = "/api/v1"
EXTENSION_KEY = "pbsdup"


def logger() -> logging.Logger:
    """Returns the module logger."""
    return logging.getLogger(__name__)


class ApiError(Exception):
    """An error answered with a JSON body and the given HTTP status."""

    def __init__(self, status: int, message: str) -> None:
        super().__init__(message)
        self.status = status
        self.message = message


@enum.unique
class JobKind(enum.Enum):
    SEARCH = "search"
    PAIRWISE = "pairwise"


@enum.unique
class JobState(enum.Enum):
    QUEUED = "queued"
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"


_TRANSITIONS = {
    JobState.QUEUED: {JobState.RUNNING},
    JobState.RUNNING: {JobState.DONE, JobState.FAILED},
    JobState.DONE: set(),
    JobState.FAILED: set(),
}


class JobRecord:
    """A request run in the background once it outlives the async threshold."""

    def __init__(self, job_id: str, kind: JobKind) -> None:
        self.job_id = job_id
        self.kind = kind
        self._state = JobState.QUEUED
        self._result: Optional[Any] = None
        self._error: Optional[str] = None
        self._lock = threading.Lock()
        self.future: Optional[Future[Any]] = None

    @property
    def state(self) -> JobState:
        with self._lock:
            return self._state

    @property
    def result(self) -> Optional[Any]:
        with self._lock:
            return self._result

    def advance(
        self, state: JobState, result: Any = None, error: Optional[str] = None
    ) -> None:
        """Moves the job along queued, running, then done or failed.

        Raises:
            ValueError: The transition is not allowed.
        """
        with self._lock:
            if state not in _TRANSITIONS[self._state]:
                raise ValueError(
                    f"job {self.job_id}: {self._state.value} -> {state.value}"
                )
            self._state = state
            self._result = result
            self._error = error

    def to_json(self) -> Dict[str, Any]:
        with self._lock:
            body: Dict[str, Any] = {
                "jobId": self.job_id,
                "kind": self.kind.value,
                "state": self._state.value,
            }
            if self._state is JobState.DONE:
                body["result"] = self._result
            elif self._state is JobState.FAILED:
                body["error"] = self._error
            return body


class JobStore:
    """In-memory jobs run on a bounded thread pool."""

    def __init__(self, workers: int) -> None:
        self.executor = ThreadPoolExecutor(max_workers=workers)
        self._jobs: Dict[str, JobRecord] = {}
        self._lock = threading.Lock()

    def submit(self, kind: JobKind, func: Callable[[], Any]) -> JobRecord:
        job = JobRecord(uuid.uuid4().hex, kind)
        with self._lock:
            self._jobs[job.job_id] = job

        def run() -> Any:
            job.advance(JobState.RUNNING)
            try:
                result = func()
            except Exception as ex:
                job.advance(JobState.FAILED, error=str(ex))
                raise
            job.advance(JobState.DONE, result=result)
            return result

        job.future = self.executor.submit(run)
        return job

    def get(self, job_id: str) -> Optional[JobRecord]:
        with self._lock:
            return self._jobs.get(job_id)

    def shutdown(self) -> None:
        self.executor.shutdown(wait=True)


class ServiceState:
    def __init__(self, settings: Settings, db: Optional[CorpusDb]) -> None:
        self.settings = settings
        self.db = db
        self.jobs = JobStore(settings.workers)

    def require_db(self) -> CorpusDb:
        if self.db is None:
            raise ApiError(503, "no database loaded")
        return self.db

    @property
    def alphabet(self) -> Alphabet:
        if self.db is not None:
            return self.db.alphabet
        return Alphabet.for_size(self.settings.alphabet_size)


def state_of(app: Flask) -> ServiceState:
    state: ServiceState = app.extensions[EXTENSION_KEY]
    return state


def load_db(app: Flask, db: CorpusDb) -> None:
    """Attaches a database to a running app; searches answer 503 until then."""
    state = state_of(app)
    if db.alphabet.size != state.settings.alphabet_size:
        logger().warning(
            "Database alphabet %d differs from configured %d; using the database's",
            db.alphabet.size,
            state.settings.alphabet_size,
        )
    state.db = db
    logger().info("Loaded database of %d documents", len(db))


def _read_body(limit: int) -> bytes:
    length = request.content_length
    if length is not None and length > limit:
        raise ApiError(413, f"body of {length} bytes exceeds the {limit} byte limit")
    data = request.get_data(cache=False)
    if len(data) > limit:
        raise ApiError(413, f"body exceeds the {limit} byte limit")
    return data


def _parse_documents(text: str, alphabet: Alphabet) -> List[PbsDocument]:
    documents = []
    for record in read_fasta(text):
        try:
            alphabet.validate(record.sequence)
        except ValidationError as ex:
            raise ValidationError(f"{record.description}: {ex}") from ex
        documents.append(PbsDocument(record.description, record.sequence))
    return documents


def _decode(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as ex:
        raise ApiError(400, "body is not UTF-8") from ex


def _dispatch(kind: JobKind, func: Callable[[], Any]) -> ResponseReturnValue:
    state = state_of(current_app)
    threshold = state.settings.async_threshold
    if threshold <= 0:
        return jsonify(func())
    job = state.jobs.submit(kind, func)
    assert job.future is not None
    try:
        return jsonify(job.future.result(timeout=threshold))
    except FutureTimeoutError:
        return jsonify({"jobId": job.job_id, "state": job.state.value}), 202


def _search(db: CorpusDb, doc: PbsDocument, settings: Settings) -> Dict[str, Any]:
    with Timer() as timer:
        report = detector.search(db, doc, settings)
    logger().info(
        "search: %d words, %d matches in %s", len(doc), len(report.matches), timer
    )
    return detector.to_metadata(report, db)


def _pairwise(
    docs: List[PbsDocument],
    settings: Settings,
    alphabet: Alphabet,
    db: Optional[CorpusDb],
) -> Dict[str, Any]:
    with Timer() as timer:
        documents = detector.pairwise_metadata(docs, settings, alphabet)
        if db is not None:
            for metadata, doc in zip(documents, docs):
                metadata["databaseSearch"] = _search(db, doc, settings)
    logger().info("pairwise: %d documents in %s", len(docs), timer)
    return {"documents": documents}


def _register_routes(app: Flask) -> None:
    @app.post(f"{API_PREFIX}/search")
    def search() -> ResponseReturnValue:
        state = state_of(current_app)
        db = state.require_db()
        text = _decode(_read_body(state.settings.max_search_body))
        docs = _parse_documents(text, db.alphabet)
        if len(docs) != 1:
            raise ApiError(400, f"expected one FASTA record, got {len(docs)}")
        settings = state.settings
        return _dispatch(JobKind.SEARCH, lambda: _search(db, docs[0], settings))

    @app.post(f"{API_PREFIX}/pairwise")
    def pairwise() -> ResponseReturnValue:
        state = state_of(current_app)
        with_search = request.args.get("search", "0") not in ("", "0", "false")
        db = state.require_db() if with_search else None
        data = _read_body(state.settings.max_zip_body)
        try:
            members = archive.read_members(data, state.settings.max_zip_body)
        except RuntimeError as ex:
            raise ApiError(400, str(ex)) from ex
        docs: List[PbsDocument] = []
        for name, content in members:
            try:
                docs.extend(_parse_documents(_decode(content), state.alphabet))
            except PbsError as ex:
                raise ApiError(400, f"{name}: {ex}") from ex
        if len(docs) < 2:
            raise UsageError(f"pairwise comparison needs 2 documents, got {len(docs)}")
        settings = state.settings
        alphabet = state.alphabet
        return _dispatch(
            JobKind.PAIRWISE, lambda: _pairwise(docs, settings, alphabet, db)
        )

    @app.get(f"{API_PREFIX}/info")
    def info() -> ResponseReturnValue:
        state = state_of(current_app)
        stats = state.require_db().stats()
        stats.update(
            {
                "seedK": state.settings.seed_k,
                "minReport": state.settings.min_report,
                "maxGap": state.settings.max_gap,
            }
        )
        return jsonify(stats)

    @app.get(f"{API_PREFIX}/jobs/<job_id>")
    def job(job_id: str) -> ResponseReturnValue:
        record = state_of(current_app).jobs.get(job_id)
        if record is None:
            raise ApiError(404, "no such job")
        return jsonify(record.to_json())


def _error(status: int, message: str) -> Tuple[Any, int]:
    return jsonify({"error": message}), status


def create_app(settings: Settings = Settings(), db: Optional[CorpusDb] = None) -> Flask:
    """Builds the service. Without db, search endpoints answer 503."""
    app = Flask(__name__)
    # Oversized bodies are refused by the handlers with per-endpoint limits.
    app.config["MAX_CONTENT_LENGTH"] = max(
        settings.max_search_body, settings.max_zip_body
    )
    app.extensions[EXTENSION_KEY] = ServiceState(settings, None)
    if db is not None:
        load_db(app, db)

    @app.errorhandler(ApiError)
    def api_error(ex: ApiError) -> ResponseReturnValue:
        return _error(ex.status, ex.message)

    @app.errorhandler(PbsError)
    def pbs_error(ex: PbsError) -> ResponseReturnValue:
        return _error(400, str(ex))

    @app.errorhandler(HTTPException)
    def http_error(ex: HTTPException) -> ResponseReturnValue:
        return _error(ex.code or 500, ex.description or ex.name)

    _register_routes(app)
    return app
