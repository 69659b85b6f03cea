"""HTTP client oracle for external model servers.

Wire protocol: POST ``/score`` with JSON ``{"sentences": [...]}``; the server
replies HTTP 200 with ``{"scores": [[...], ...]}``, one numeric row per input
sentence. No retries by default so query counts stay honest.
"""

from __future__ import annotations

import requests

from .oracle import Oracle, OracleError


class RemoteOracleError(OracleError):
    def __init__(self, message: str, payload=None):
        super().__init__(message)
        self.payload = payload


class RemoteTransportError(RemoteOracleError):
    pass


class RemoteStatusError(RemoteOracleError):
    pass


class RemoteSchemaError(RemoteOracleError):
    pass


class RemoteOracle(Oracle):
    def __init__(
        self,
        endpoint: str,
        num_classes: int | None = None,
        batch_limit: int = 64,
        retries: int = 0,
        timeout: float = 30.0,
        session: requests.Session | None = None,
    ):
        url = endpoint.rstrip("/")
        if not url.endswith("/score"):
            url += "/score"
        self.url = url
        self.num_classes = num_classes  # learned from the first response if None
        self.batch_limit = batch_limit
        self.retries = retries
        self.timeout = timeout
        self.session = session or requests.Session()

    def _post(self, body: dict):
        last_exc = None
        for _ in range(self.retries + 1):
            try:
                return self.session.post(self.url, json=body, timeout=self.timeout)
            except requests.RequestException as exc:
                last_exc = exc
        raise RemoteTransportError(f"transport failure contacting {self.url}: {last_exc}")

    def _score_chunk(self, sentences: list[str]) -> list[list[float]]:
        if not sentences:
            return []
        resp = self._post({"sentences": sentences})
        if not 200 <= resp.status_code < 300:
            raise RemoteStatusError(
                f"server returned HTTP {resp.status_code}", payload=resp.text
            )
        try:
            doc = resp.json()
        except ValueError:
            raise RemoteSchemaError("response is not valid JSON", payload=resp.text)
        rows = doc.get("scores") if isinstance(doc, dict) else None
        if not isinstance(rows, list) or len(rows) != len(sentences):
            raise RemoteSchemaError(
                f"expected {len(sentences)} score rows, got "
                f"{len(rows) if isinstance(rows, list) else type(rows).__name__}",
                payload=doc,
            )
        out = []
        for row in rows:
            if not isinstance(row, list) or len(row) < 2 or not all(
                isinstance(v, (int, float)) for v in row
            ):
                raise RemoteSchemaError("malformed score row", payload=doc)
            if self.num_classes is None:
                self.num_classes = len(row)
            elif len(row) != self.num_classes:
                raise RemoteSchemaError(
                    f"score row length {len(row)} != {self.num_classes} classes",
                    payload=doc,
                )
            out.append([float(v) for v in row])
        return out
