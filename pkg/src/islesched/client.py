"""HTTP client for the scheduling service.

The CLI (and any other consumer) talks to the service exclusively through
this client. Without a server URL it mounts the application in-process over
an ASGI transport, so the command line works standalone while exercising the
exact HTTP surface a remote deployment exposes.
"""

from __future__ import annotations

from typing import Any

import httpx


class ServiceClientError(RuntimeError):
    """Non-2xx response from the service; carries the HTTP detail."""

    def __init__(self, status_code: int, detail: str):
        super().__init__(f"service returned {status_code}: {detail}")
        self.status_code = status_code
        self.detail = detail


class ServiceClient:
    """Synchronous client; ``base_url=None`` runs the app in-process."""

    def __init__(self, base_url: str | None = None, timeout: float | None = None):
        if base_url is None:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service.app import app

            self._client: httpx.Client = TestClient(app)
            self._client.timeout = timeout
        else:
            self._client = httpx.Client(base_url=base_url, timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _post(self, path: str, payload: dict[str, Any]) -> dict[str, Any]:
        response = self._client.post(path, json=payload)
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise ServiceClientError(response.status_code, str(detail))
        return response.json()

    def health(self) -> dict[str, Any]:
        response = self._client.get("/health")
        response.raise_for_status()
        return response.json()

    def validate_fleet(self, config: dict[str, Any]) -> dict[str, Any]:
        return self._post("/fleet/validate", {"config": config})

    def solve(self, config: dict[str, Any], **options: Any) -> dict[str, Any]:
        return self._post("/solve", {"config": config, **options})

    def sweep_psi(self, config: dict[str, Any], grid: list[float], **options: Any) -> dict[str, Any]:
        return self._post("/sweep/psi", {"config": config, "grid": grid, **options})

    def sweep_corr(self, config: dict[str, Any], grid: list[float], **options: Any) -> dict[str, Any]:
        return self._post("/sweep/corr", {"config": config, "grid": grid, **options})

    def export_mps(self, config: dict[str, Any], **options: Any) -> dict[str, Any]:
        return self._post("/export/mps", {"config": config, **options})
