from __future__ import annotations

import threading
import time

import pytest
import uvicorn

from fixture_server import DomainFixtureServer, PageSpec

VALID_PAGE = (
    "<html><body><footer>"
    '<a href="/do-not-sell">Do Not Sell My Personal Information</a>'
    "</footer></body></html>"
)
AMBIGUOUS_PAGE = (
    '<html><body><a href="/ca-privacy">Your California Privacy Rights</a></body></html>'
)
PLAIN_PAGE = '<html><body><a href="/about">About Us</a></body></html>'


@pytest.fixture
def fixture_server():
    started: list[DomainFixtureServer] = []

    def factory(sites: dict[str, PageSpec]) -> DomainFixtureServer:
        server = DomainFixtureServer(sites).start()
        started.append(server)
        return server

    yield factory
    for server in started:
        server.stop()


class WireTap:
    """ASGI wrapper recording the raw request bodies the service receives."""

    def __init__(self, app) -> None:
        self.app = app
        self.captured: list[bytes] = []
        self._lock = threading.Lock()

    async def __call__(self, scope, receive, send):
        if scope["type"] != "http":
            await self.app(scope, receive, send)
            return

        async def tapped_receive():
            message = await receive()
            if message["type"] == "http.request":
                with self._lock:
                    self.captured.append(message.get("body", b""))
            return message

        await self.app(scope, tapped_receive, send)


class ServiceRunner:
    """Real uvicorn server on a random localhost port, in a thread."""

    def __init__(self, app) -> None:
        config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="error")
        self.server = uvicorn.Server(config)
        self.thread = threading.Thread(target=self.server.run, daemon=True)
        self.base_url = ""

    def start(self) -> "ServiceRunner":
        self.thread.start()
        deadline = time.monotonic() + 10
        while not self.server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("service did not start")
            time.sleep(0.01)
        port = self.server.servers[0].sockets[0].getsockname()[1]
        self.base_url = f"http://127.0.0.1:{port}"
        return self

    def stop(self) -> None:
        self.server.should_exit = True
        self.thread.join(timeout=10)


@pytest.fixture
def run_service():
    running: list[ServiceRunner] = []

    def factory(app) -> ServiceRunner:
        runner = ServiceRunner(app).start()
        running.append(runner)
        return runner

    yield factory
    for runner in running:
        runner.stop()
