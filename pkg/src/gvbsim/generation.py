"""Emergency message generation: seed composition, a deterministic
template backend, an optional external generator protocol, and fitting
messages to the burst duration.

The external generator speaks a one-line-per-message protocol over the
child process's standard streams (or a TCP connection):

    request:  GENERATE max_words=<int> temperature=<decimal> sample=<0|1>
              seed_rng=<uint> text=<percent-encoded seed>
    response: OK text=<percent-encoded message>   |   ERR <reason>

Percent-encoding covers space, percent, and newline bytes.  Any external
failure (timeout, dead process, ERR reply) falls back to the template
backend; the returned message records the fallback reason.
"""
from __future__ import annotations

import math
import re
import shlex
import socket
import subprocess
import threading
from dataclasses import dataclass, replace
from enum import Enum
from queue import Empty, Queue
from typing import IO

from .errors import EmptyBundle, EmptySeed, ExternalGeneratorError, ExternalTimeout

DEFAULT_MAX_WORDS = 50
DEFAULT_TEMPERATURE = 0.9
DEFAULT_SPEAKING_RATE_WPS = 2.5
DEFAULT_EXTERNAL_TIMEOUT_S = 2.0


@dataclass(frozen=True)
class SeedBundle:
    """Contextual inputs for generation, in their canonical emission order."""

    keywords: str | None = None
    gesture_desc: str | None = None
    image_desc: str | None = None
    video_desc: str | None = None
    background_speech: str | None = None
    background_noise_desc: str | None = None
    context_summary: str | None = None
    location_type: str | None = None

    def is_empty(self) -> bool:
        return all(value is None for value in self.__dict__.values())


_SEED_LABELS = (
    ("keywords", "keywords"),
    ("gesture_desc", "gesture"),
    ("image_desc", "image"),
    ("video_desc", "video"),
    ("background_speech", "speech"),
    ("background_noise_desc", "noise"),
    ("context_summary", "context"),
    ("location_type", "location"),
)


def compose_seed(bundle: SeedBundle) -> str:
    """Concatenate present fields, labelled, in canonical order."""
    parts = [
        f"{label}: {getattr(bundle, field)}"
        for field, label in _SEED_LABELS
        if getattr(bundle, field) is not None
    ]
    if not parts:
        raise EmptyBundle("seed bundle has no populated fields")
    return "; ".join(parts)


@dataclass(frozen=True)
class GenerationParams:
    max_words: int = DEFAULT_MAX_WORDS
    temperature: float = DEFAULT_TEMPERATURE
    sampling: bool = True
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.max_words < 1:
            raise ValueError(f"max_words must be >= 1, got {self.max_words}")
        if self.temperature <= 0:
            raise ValueError(f"temperature must be > 0, got {self.temperature}")
        if self.rng_seed < 0:
            raise ValueError(f"rng_seed must be unsigned, got {self.rng_seed}")


class BackendKind(Enum):
    TEMPLATE = "template"
    EXTERNAL = "external"


@dataclass(frozen=True)
class GeneratedMessage:
    text: str
    word_count: int
    estimated_speech_seconds: float
    backend: BackendKind
    fallback_reason: str | None = None


# Scanned in order; the first term found in the seed picks the message.
# Each message repeats its trigger term so the output stays anchored to
# the seed content.
_TEMPLATE_RULES: tuple[tuple[str, str], ...] = (
    ("fire", "The house is on fire. Please send help immediately."),
    ("smoke", "There is smoke everywhere. Please send the fire brigade."),
    ("accident", "I have met an accident. Please send an ambulance."),
    ("crash", "There has been a crash. Please send an ambulance."),
    ("fainting", "I am fainting. Please send medical help."),
    ("faint", "I feel faint. Please send medical help."),
    ("collapsed", "Someone has collapsed. Please send an ambulance."),
    ("blood", "There is blood and someone is hurt. Please send an ambulance."),
    ("intruder", "An intruder is in the house. Please call the police."),
    ("thief", "A thief has entered the house. Please call the police."),
)

_LOCATION_IN_SEED = re.compile(r"(?:^|; )location: ([^;]+)")


def _template_text(seed: str) -> str:
    for term, message in _TEMPLATE_RULES:
        if re.search(r"\b" + re.escape(term) + r"\b", seed, re.IGNORECASE):
            return message
    location = _LOCATION_IN_SEED.search(seed)
    if location:
        return f"Emergency. Please call back immediately. Location: {location.group(1).strip()}."
    return "Emergency. Please call back immediately."


class TemplateBackend:
    """Deterministic rule-table generator; pure in (seed, params)."""

    kind = BackendKind.TEMPLATE

    def generate(self, seed: str, params: GenerationParams) -> str:
        text = _template_text(seed)
        words = text.split()
        if len(words) > params.max_words:
            # keep the output sentence-terminated even when capped
            text = " ".join(words[: params.max_words]).rstrip(".,;:") + "."
        return text

    def close(self) -> None:
        pass


# --- external generator wire protocol ---

def encode_text(text: str) -> str:
    """Percent-encode the bytes the line protocol reserves."""
    return text.replace("%", "%25").replace(" ", "%20").replace("\n", "%0A")


def decode_text(text: str) -> str:
    return re.sub("%([0-9A-Fa-f]{2})", lambda m: chr(int(m.group(1), 16)), text)


def build_request_line(seed: str, params: GenerationParams) -> str:
    return (
        f"GENERATE max_words={params.max_words}"
        f" temperature={params.temperature:g}"
        f" sample={1 if params.sampling else 0}"
        f" seed_rng={params.rng_seed}"
        f" text={encode_text(seed)}"
    )


def parse_response_line(line: str) -> str:
    line = line.rstrip("\r\n")
    if line.startswith("OK text="):
        return decode_text(line[len("OK text="):])
    if line.startswith("ERR"):
        reason = line[3:].strip() or "unspecified"
        raise ExternalGeneratorError(f"generator error: {reason}")
    raise ExternalGeneratorError(f"malformed response: {line!r}")


class _LineReader:
    """Background reader so a stuck peer cannot block the simulation
    longer than the configured timeout."""

    def __init__(self, stream: IO[bytes]):
        self._queue: Queue[bytes | None] = Queue()
        self._thread = threading.Thread(target=self._pump, args=(stream,), daemon=True)
        self._thread.start()

    def _pump(self, stream: IO[bytes]) -> None:
        try:
            for line in stream:
                self._queue.put(line)
        except (ValueError, OSError):
            pass  # stream closed under us
        self._queue.put(None)

    def readline(self, timeout: float) -> bytes:
        try:
            line = self._queue.get(timeout=timeout)
        except Empty:
            raise ExternalTimeout("timeout waiting for generator response") from None
        if line is None:
            raise ExternalGeneratorError("generator closed its output stream")
        return line


class ExternalBackend:
    """Client for an out-of-process generator.

    `target` is either a command line to spawn (stdio transport) or
    `tcp:<host>:<port>` for an already-listening server.  One request is
    in flight at a time; any failure surfaces as ExternalGeneratorError
    and tears the connection down so the next request starts clean.
    """

    kind = BackendKind.EXTERNAL

    def __init__(self, target: str, timeout: float = DEFAULT_EXTERNAL_TIMEOUT_S):
        if not target:
            raise ValueError("external backend target must be non-empty")
        self._target = target
        self._timeout = timeout
        self._proc: subprocess.Popen[bytes] | None = None
        self._sock: socket.socket | None = None
        self._writer: IO[bytes] | None = None
        self._reader: _LineReader | None = None

    def _connect(self) -> None:
        if self._target.startswith("tcp:"):
            _, host, port = self._target.split(":", 2)
            self._sock = socket.create_connection((host, int(port)), timeout=self._timeout)
            # per-request deadlines come from the reader queue, not the socket
            self._sock.settimeout(None)
            self._writer = self._sock.makefile("wb")
            self._reader = _LineReader(self._sock.makefile("rb"))
        else:
            self._proc = subprocess.Popen(
                shlex.split(self._target),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
            assert self._proc.stdin is not None and self._proc.stdout is not None
            self._writer = self._proc.stdin
            self._reader = _LineReader(self._proc.stdout)

    def generate(self, seed: str, params: GenerationParams) -> str:
        if self._writer is None:
            try:
                self._connect()
            except (OSError, ValueError) as exc:
                raise ExternalGeneratorError(f"cannot reach generator: {exc}") from exc
        assert self._writer is not None and self._reader is not None
        request = build_request_line(seed, params).encode("utf-8") + b"\n"
        try:
            self._writer.write(request)
            self._writer.flush()
            line = self._reader.readline(self._timeout)
        except (OSError, ExternalGeneratorError) as exc:
            self.close()
            if isinstance(exc, ExternalGeneratorError):
                raise
            raise ExternalGeneratorError(f"generator transport failed: {exc}") from exc
        return parse_response_line(line.decode("utf-8"))

    def close(self) -> None:
        if self._writer is not None:
            try:
                self._writer.close()
            except OSError:
                pass
        if self._proc is not None:
            self._proc.kill()
            self._proc.wait()
            if self._proc.stdout is not None:
                self._proc.stdout.close()
            self._proc = None
        if self._sock is not None:
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            self._sock.close()
            self._sock = None
        self._writer = None
        self._reader = None


def build_backend(spec: str, timeout: float = DEFAULT_EXTERNAL_TIMEOUT_S):
    """Build a backend from a CLI-style spec: `template` or `external=<target>`."""
    if spec == "template":
        return TemplateBackend()
    if spec.startswith("external="):
        return ExternalBackend(spec[len("external="):], timeout=timeout)
    raise ValueError(f"unknown backend spec {spec!r}")


def generate_message(
    seed: str,
    params: GenerationParams = GenerationParams(),
    backend: TemplateBackend | ExternalBackend | None = None,
    speaking_rate: float = DEFAULT_SPEAKING_RATE_WPS,
) -> GeneratedMessage:
    """Produce a message for `seed`; external failures fall back to the
    template backend and note the reason on the message."""
    if not seed.strip():
        raise EmptySeed("seed must be non-empty")
    if speaking_rate <= 0:
        raise ValueError(f"speaking_rate must be > 0, got {speaking_rate}")
    fallback_reason: str | None = None
    if backend is None or isinstance(backend, TemplateBackend):
        text = (backend or TemplateBackend()).generate(seed, params)
        kind = BackendKind.TEMPLATE
    else:
        try:
            text = backend.generate(seed, params)
            kind = BackendKind.EXTERNAL
            if not text.strip():
                raise ExternalGeneratorError("generator returned empty text")
        except ExternalGeneratorError as exc:
            fallback_reason = str(exc)
            text = TemplateBackend().generate(seed, params)
            kind = BackendKind.TEMPLATE
    word_count = len(text.split())
    return GeneratedMessage(
        text=text,
        word_count=word_count,
        estimated_speech_seconds=word_count / speaking_rate,
        backend=kind,
        fallback_reason=fallback_reason,
    )


_SENTENCE_SPLIT = re.compile(r"[^.!?]+[.!?]+|[^.!?]+$")


def _sentences(text: str) -> list[str]:
    return [chunk.strip() for chunk in _SENTENCE_SPLIT.findall(text) if chunk.strip()]


def fit_to_duration(
    msg: GeneratedMessage,
    t: int,
    speaking_rate: float = DEFAULT_SPEAKING_RATE_WPS,
) -> GeneratedMessage:
    """Shrink `msg` so it speaks within `t` seconds at `speaking_rate`.

    Whole trailing sentences are dropped first; if even the first sentence
    exceeds the word budget, the text is cut at the budget.  The timing
    estimate is recomputed at the given rate either way.
    """
    if t < 1:
        raise ValueError(f"burst duration must be >= 1s, got {t}")
    if speaking_rate <= 0:
        raise ValueError(f"speaking_rate must be > 0, got {speaking_rate}")
    budget = math.floor(t * speaking_rate)
    words = msg.text.split()
    if len(words) > budget:
        kept: list[str] = []
        used = 0
        for sentence in _sentences(msg.text):
            sentence_words = len(sentence.split())
            if used + sentence_words > budget:
                break
            kept.append(sentence)
            used += sentence_words
        text = " ".join(kept) if kept else " ".join(words[:budget])
    else:
        text = msg.text
    word_count = len(text.split())
    return replace(
        msg,
        text=text,
        word_count=word_count,
        estimated_speech_seconds=word_count / speaking_rate,
    )
