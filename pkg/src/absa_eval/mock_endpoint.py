"""A local chat-completion server for tests and offline dry runs.

Responders map the request (its final ``Input: \"\"\"...\"\"\"`` sentence) to a
response string. Two stock responders cover the evaluation oracles: one
echoes each sentence's serialized gold tuples (perfect model), one always
answers the empty list. The server counts in-flight requests so tests can
assert concurrency bounds, and can inject failures and delays.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable

from .prompts import serialize_tuples
from .types import DatasetBundle

Responder = Callable[[str], str]


def extract_query_sentence(prompt: str) -> str | None:
    """The sentence inside the last Input line of a rendered prompt."""
    marker = 'Input: """'
    start = prompt.rfind(marker)
    if start == -1:
        return None
    start += len(marker)
    end = prompt.find('"""', start)
    if end == -1:
        return None
    return prompt[start:end]


def echo_gold_responder(bundle: DatasetBundle) -> Responder:
    """Answers every known sentence with its serialized gold tuples."""
    gold = {
        s.text: serialize_tuples(s.gold, bundle.schema)
        for _, sentences in bundle.splits()
        for s in sentences
    }

    def respond(prompt: str) -> str:
        sentence = extract_query_sentence(prompt)
        return gold.get(sentence, "Sentiment elements: []")

    return respond


def empty_list_responder() -> Responder:
    return lambda prompt: "Sentiment elements: []"


class MockEndpoint:
    """In-process chat-completion endpoint bound to an ephemeral local port."""

    def __init__(
        self,
        responder: Responder,
        fail_first: int = 0,
        delay: Callable[[int], float] | None = None,
        finish_reason: str = "stop",
        auth_token: str | None = None,
    ):
        self.responder = responder
        self.fail_first = fail_first
        self.delay = delay
        self.finish_reason = finish_reason
        self.auth_token = auth_token
        self.total_requests = 0
        self.max_concurrent = 0
        self._in_flight = 0
        self._lock = threading.Lock()
        self._server: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    @property
    def base_url(self) -> str:
        assert self._server is not None, "endpoint not started"
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}/v1"

    def start(self) -> "MockEndpoint":
        endpoint = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # silence request logging
                pass

            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                payload = json.loads(self.rfile.read(length) or b"{}")
                with endpoint._lock:
                    endpoint.total_requests += 1
                    request_no = endpoint.total_requests
                    endpoint._in_flight += 1
                    endpoint.max_concurrent = max(endpoint.max_concurrent, endpoint._in_flight)
                try:
                    if endpoint.auth_token is not None:
                        if self.headers.get("Authorization") != f"Bearer {endpoint.auth_token}":
                            self.send_response(401)
                            self.end_headers()
                            self.wfile.write(b"unauthorized")
                            return
                    if endpoint.delay is not None:
                        time.sleep(endpoint.delay(request_no))
                    if request_no <= endpoint.fail_first:
                        self.send_response(500)
                        self.end_headers()
                        self.wfile.write(b"injected failure")
                        return
                    prompt = payload.get("messages", [{}])[-1].get("content", "")
                    try:
                        content = endpoint.responder(prompt)
                    except Exception as e:  # responder-driven failure injection
                        self.send_response(500)
                        self.end_headers()
                        self.wfile.write(str(e).encode())
                        return
                    body = json.dumps(
                        {
                            "id": "mock-completion",
                            "object": "chat.completion",
                            "model": payload.get("model", "mock"),
                            "choices": [
                                {
                                    "index": 0,
                                    "message": {"role": "assistant", "content": content},
                                    "finish_reason": endpoint.finish_reason,
                                }
                            ],
                        }
                    ).encode("utf-8")
                    self.send_response(200)
                    self.send_header("Content-Type", "application/json")
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                finally:
                    with endpoint._lock:
                        endpoint._in_flight -= 1

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None

    def __enter__(self) -> "MockEndpoint":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
