from __future__ import annotations

import socket
import socketserver
import threading

import pytest

from gvbsim.errors import ExternalGeneratorError, ExternalTimeout
from gvbsim.generation import (
    BackendKind,
    ExternalBackend,
    GenerationParams,
    TemplateBackend,
    build_backend,
    build_request_line,
    decode_text,
    encode_text,
    generate_message,
    parse_response_line,
)

from .conftest import stub_command


# -- percent encoding --

@pytest.mark.parametrize(
    "raw",
    ["plain", "two words", "100% sure", "line\nbreak", "mix 50% of\nall three", ""],
)
def test_encoding_round_trips(raw):
    encoded = encode_text(raw)
    assert " " not in encoded and "\n" not in encoded
    assert decode_text(encoded) == raw


def test_encoding_is_order_safe():
    # '%' must be escaped first or '%20' would double-encode
    assert encode_text("% 20") == "%25%2020"
    assert decode_text("%25%2020") == "% 20"


# -- request/response lines --

def test_request_line_carries_generation_parameters():
    params = GenerationParams(max_words=50, temperature=0.9, sampling=True, rng_seed=7)
    line = build_request_line("House Fire Help Come", params)
    assert line.startswith("GENERATE ")
    assert " max_words=50 " in line
    assert " temperature=0.9 " in line
    assert " sample=1 " in line
    assert " seed_rng=7 " in line
    assert line.endswith(" text=House%20Fire%20Help%20Come")


def test_sampling_flag_renders_as_zero_when_off():
    line = build_request_line("x", GenerationParams(sampling=False))
    assert " sample=0 " in line


def test_response_parsing():
    assert parse_response_line("OK text=hello%20there\n") == "hello there"
    with pytest.raises(ExternalGeneratorError):
        parse_response_line("ERR model_unavailable")
    with pytest.raises(ExternalGeneratorError):
        parse_response_line("garbage")


# -- subprocess transport --

def test_echo_stub_receives_the_documented_request():
    backend = ExternalBackend(stub_command("gen_echo.py"), timeout=10.0)
    try:
        msg = generate_message("House Fire", GenerationParams(rng_seed=3), backend)
    finally:
        backend.close()
    assert msg.backend is BackendKind.EXTERNAL
    assert msg.fallback_reason is None
    request = msg.text  # the stub echoes the raw request line back
    assert request.startswith("GENERATE ")
    assert "max_words=50" in request
    assert "temperature=0.9" in request
    assert "sample=1" in request
    assert "seed_rng=3" in request
    assert "text=House%20Fire" in request


def test_fixed_stub_reply_is_decoded():
    backend = ExternalBackend(stub_command("gen_fixed.py"), timeout=10.0)
    try:
        msg = generate_message("anything at all", backend=backend)
    finally:
        backend.close()
    assert msg.text == "Generator says: the kitchen is burning."
    assert msg.backend is BackendKind.EXTERNAL


def test_err_reply_falls_back_to_template():
    backend = ExternalBackend(stub_command("gen_error.py"), timeout=10.0)
    try:
        msg = generate_message("keywords: fire", backend=backend)
    finally:
        backend.close()
    assert msg.backend is BackendKind.TEMPLATE
    assert msg.fallback_reason is not None
    assert "model_unavailable" in msg.fallback_reason
    assert "fire" in msg.text.lower()


def test_timeout_falls_back_to_template():
    backend = ExternalBackend(stub_command("gen_sleepy.py"), timeout=0.3)
    try:
        msg = generate_message("keywords: fire", backend=backend)
    finally:
        backend.close()
    assert msg.backend is BackendKind.TEMPLATE
    assert msg.fallback_reason is not None
    assert "timeout" in msg.fallback_reason


def test_timeout_surfaces_as_its_own_error_type():
    backend = ExternalBackend(stub_command("gen_sleepy.py"), timeout=0.3)
    try:
        with pytest.raises(ExternalTimeout):
            backend.generate("seed", GenerationParams())
    finally:
        backend.close()


def test_unreachable_command_falls_back():
    backend = ExternalBackend("/nonexistent/generator --flag", timeout=1.0)
    msg = generate_message("keywords: fire", backend=backend)
    assert msg.backend is BackendKind.TEMPLATE
    assert msg.fallback_reason is not None


def test_multiple_requests_reuse_one_child():
    backend = ExternalBackend(stub_command("gen_echo.py"), timeout=10.0)
    try:
        first = generate_message("first seed", backend=backend)
        second = generate_message("second seed", backend=backend)
    finally:
        backend.close()
    assert "text=first%20seed" in first.text
    assert "text=second%20seed" in second.text


# -- tcp transport --

class _TcpGenerator(socketserver.StreamRequestHandler):
    def handle(self):
        for line in self.rfile:
            if not line.strip():
                continue
            self.wfile.write(b"OK text=tcp%20generator%20reply\n")
            self.wfile.flush()


def test_tcp_transport():
    server = socketserver.ThreadingTCPServer(("127.0.0.1", 0), _TcpGenerator)
    port = server.server_address[1]
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        backend = ExternalBackend(f"tcp:127.0.0.1:{port}", timeout=5.0)
        try:
            msg = generate_message("seed text", backend=backend)
        finally:
            backend.close()
        assert msg.text == "tcp generator reply"
        assert msg.backend is BackendKind.EXTERNAL
    finally:
        server.shutdown()
        server.server_close()


def test_tcp_connection_refused_falls_back():
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        free_port = probe.getsockname()[1]
    backend = ExternalBackend(f"tcp:127.0.0.1:{free_port}", timeout=0.5)
    msg = generate_message("keywords: fire", backend=backend)
    assert msg.backend is BackendKind.TEMPLATE
    assert msg.fallback_reason is not None


# -- backend spec parsing --

def test_build_backend_specs():
    assert isinstance(build_backend("template"), TemplateBackend)
    external = build_backend("external=some command")
    assert isinstance(external, ExternalBackend)
    external.close()
    with pytest.raises(ValueError):
        build_backend("mystery")
