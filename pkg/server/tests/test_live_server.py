"""End-to-end over real HTTP: the evaluation harness's client against a live server."""
import socket
import threading
import time

import pytest
import uvicorn

from absa_inference_server import ModelSpec, create_app, load_engine

from absa_promptkit.backend import FILL_MASK, GENERATE, BackendRequest, HttpBackend


def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture(scope="module")
def live_mlm_server(mlm_checkpoint):
    engine = load_engine(ModelSpec(model=mlm_checkpoint, mode="mlm"))
    port = _free_port()
    config = uvicorn.Config(create_app(engine), host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 15
    while not server.started:
        if time.monotonic() > deadline:
            pytest.fail("server did not start")
        time.sleep(0.05)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def test_harness_client_round_trip(live_mlm_server):
    backend = HttpBackend(live_mlm_server)
    assert backend.health()["status"] == "ok"
    resp = backend.respond(BackendRequest(
        FILL_MASK, "e1", "je to [MASK] film .",
        candidate_words=["dobrý", "ok", "špatný"]))
    assert resp.chosen_word in ("dobrý", "ok", "špatný")
    assert set(resp.scores) == {"dobrý", "ok", "špatný"}


def test_harness_client_rejects_wrong_mode(live_mlm_server):
    from absa_promptkit.errors import TransportError
    backend = HttpBackend(live_mlm_server, retries=0, backoff=0.01)
    with pytest.raises(TransportError):
        backend.respond(BackendRequest(GENERATE, "e2", "x"))
