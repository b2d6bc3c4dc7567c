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
"""Tests for pbsdup.client."""
from __future__ import annotations

import time
from typing import Any, List, Optional
import unittest
from unittest import mock
from urllib.parse import urlsplit

from flask import Flask
import requests
from requests.structures import CaseInsensitiveDict

from pbsdup import detector, service
from pbsdup.client import ServiceClient
from pbsdup.config import Settings
from pbsdup.errors import NetworkError, ServerError
from pbsdup.test_service import fixture_db, zip_of


SERVER = "http://pbsdup.test"


class FlaskSession(requests.Session):
    """Routes requests into a flask app's test client and keeps the bodies."""

    def __init__(self, app: Flask) -> None:
        super().__init__()
        self.client = app.test_client()
        self.sent: List[bytes] = []

    def request(  # type: ignore[override]
        self,
        method: str,
        url: str,
        data: Optional[bytes] = None,
        params: Any = None,
        headers: Any = None,
        timeout: Any = None,
    ) -> requests.Response:
        if data is not None:
            self.sent.append(data)
        answer = self.client.open(
            urlsplit(url).path,
            method=method,
            data=data,
            query_string=params,
            headers=headers,
        )
        response = requests.Response()
        response.status_code = answer.status_code
        response._content = answer.get_data()
        response.headers = CaseInsensitiveDict(dict(answer.headers))
        response.reason = answer.status.partition(" ")[2]
        response.encoding = "utf-8"
        response.url = url
        return response


def service_client(
    settings: Settings = Settings(), with_db: bool = True
) -> tuple[ServiceClient, FlaskSession, str]:
    db, query = fixture_db()
    app = service.create_app(settings, db if with_db else None)
    session = FlaskSession(app)
    return ServiceClient(SERVER, poll_interval=0.01, session=session), session, query


class SearchTest(unittest.TestCase):
    def test_planted_duplicate(self) -> None:
        client, session, query = service_client()
        body = client.search(f">q\n{query}\n".encode())
        self.assertEqual(1, len(body["matches"]))
        self.assertEqual([f">q\n{query}\n".encode()], session.sent)

    def test_illegal_character(self) -> None:
        client, _, _ = service_client()
        with self.assertRaises(ServerError) as cm:
            client.search(b">q\nBBBB\n")
        self.assertEqual(400, cm.exception.status)
        self.assertIn("illegal character", str(cm.exception))

    def test_no_database(self) -> None:
        client, _, _ = service_client(with_db=False)
        with self.assertRaises(ServerError) as cm:
            client.info()
        self.assertEqual(503, cm.exception.status)
        self.assertIn("no database loaded", str(cm.exception))

    def test_info(self) -> None:
        client, _, _ = service_client()
        self.assertEqual(3, client.info()["documentCount"])

    def test_polls_slow_jobs(self) -> None:
        client, _, query = service_client(Settings(async_threshold=0.01))
        real_search = detector.search

        def slow_search(*args: Any) -> Any:
            time.sleep(0.2)
            return real_search(*args)

        with mock.patch.object(detector, "search", slow_search):
            body = client.search(f">q\n{query}\n".encode())
        self.assertEqual("q", body["queryId"])
        self.assertEqual(1, len(body["matches"]))


class PairwiseTest(unittest.TestCase):
    def test_one_file(self) -> None:
        client, _, _ = service_client()
        with self.assertRaises(ServerError) as cm:
            client.pairwise(zip_of([("a.fasta", ">a\nACDEG\n")]))
        self.assertEqual(400, cm.exception.status)

    def test_with_search(self) -> None:
        client, _, query = service_client()
        body = client.pairwise(
            zip_of([("q.fasta", f">q\n{query}\n"), ("r.fasta", ">r\nACDEGHIK\n")]),
            search=True,
        )
        documents = body["documents"]
        self.assertEqual(["q", "r"], [d["queryId"] for d in documents])
        self.assertEqual(1, len(documents[0]["databaseSearch"]["matches"]))


class NetworkTest(unittest.TestCase):
    def test_connection_refused(self) -> None:
        session = requests.Session()
        client = ServiceClient("http://127.0.0.1:9", session=session)
        with mock.patch.object(
            session, "request", side_effect=requests.ConnectionError("refused")
        ):
            with self.assertRaises(NetworkError):
                client.search(b">q\nACDE\n")

    def test_timeout(self) -> None:
        session = requests.Session()
        client = ServiceClient("http://127.0.0.1:9", timeout=1.0, session=session)
        with mock.patch.object(session, "request", side_effect=requests.Timeout()):
            with self.assertRaises(NetworkError):
                client.info()

    def test_trailing_slash(self) -> None:
        client = ServiceClient("http://host:8080/")
        self.assertEqual("http://host:8080/api/v1/info", client._url("/info"))
