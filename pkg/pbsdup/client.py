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
"""HTTP client for the search service.

Only encoded sequences are ever uploaded. Request bodies are sent exactly as
given.
"""
from __future__ import annotations

import logging
import time
from typing import Any, Dict, Mapping, Optional

import requests

from pbsdup.errors import NetworkError, ServerError


API_PREFIX = "/api/v1"
DEFAULT_TIMEOUT = 300.0
DEFAULT_POLL_INTERVAL = 1.0


def logger() -> logging.Logger:
    """Returns the module logger."""
    return logging.getLogger(__name__)


class ServiceClient:
    """Talks to one search service.

    Responses answered asynchronously (202 with a job id) are polled until
    the job finishes, so every call returns the final result document.
    """

    def __init__(
        self,
        server: str,
        timeout: float = DEFAULT_TIMEOUT,
        poll_interval: float = DEFAULT_POLL_INTERVAL,
        session: Optional[requests.Session] = None,
    ) -> None:
        self.server = server.rstrip("/")
        self.timeout = timeout
        self.poll_interval = poll_interval
        self.session = session if session is not None else requests.Session()

    def _url(self, path: str) -> str:
        return f"{self.server}{API_PREFIX}{path}"

    def _request(
        self,
        method: str,
        path: str,
        data: Optional[bytes] = None,
        content_type: Optional[str] = None,
        params: Optional[Mapping[str, str]] = None,
    ) -> requests.Response:
        headers = {"Accept": "application/json"}
        if content_type is not None:
            headers["Content-Type"] = content_type
        try:
            return self.session.request(
                method,
                self._url(path),
                data=data,
                params=params,
                headers=headers,
                timeout=self.timeout,
            )
        except requests.RequestException as ex:
            raise NetworkError(f"cannot reach {self.server}: {ex}") from ex

    @staticmethod
    def _json(response: requests.Response) -> Dict[str, Any]:
        try:
            body = response.json()
        except ValueError:
            body = None
        if response.status_code >= 400:
            if isinstance(body, dict) and "error" in body:
                message = str(body["error"])
            else:
                message = response.reason or response.text[:200]
            raise ServerError(response.status_code, message)
        if not isinstance(body, dict):
            raise ServerError(response.status_code, "response is not a JSON object")
        return body

    def _finish(self, response: requests.Response) -> Dict[str, Any]:
        body = self._json(response)
        if response.status_code != 202:
            return body
        job_id = str(body["jobId"])
        logger().info("Server queued job %s; polling", job_id)
        deadline = time.monotonic() + self.timeout
        while True:
            job = self.job(job_id)
            if job["state"] == "done":
                result: Dict[str, Any] = job["result"]
                return result
            if job["state"] == "failed":
                raise ServerError(500, f"job {job_id} failed: {job.get('error')}")
            if time.monotonic() > deadline:
                raise NetworkError(f"job {job_id} did not finish in {self.timeout}s")
            time.sleep(self.poll_interval)

    def search(self, fasta: bytes) -> Dict[str, Any]:
        """Searches one FASTA record against the loaded database."""
        logger().info("Uploading %d bytes for search", len(fasta))
        response = self._request(
            "POST", "/search", fasta, "text/plain; charset=utf-8"
        )
        return self._finish(response)

    def pairwise(self, zip_bytes: bytes, search: bool = False) -> Dict[str, Any]:
        """Compares the FASTA files of a zip with each other.

        With search set, every document is also searched against the loaded
        database.
        """
        logger().info("Uploading %d bytes for pairwise comparison", len(zip_bytes))
        params = {"search": "1"} if search else None
        response = self._request(
            "POST", "/pairwise", zip_bytes, "application/zip", params
        )
        return self._finish(response)

    def info(self) -> Dict[str, Any]:
        return self._json(self._request("GET", "/info"))

    def job(self, job_id: str) -> Dict[str, Any]:
        return self._json(self._request("GET", f"/jobs/{job_id}"))
