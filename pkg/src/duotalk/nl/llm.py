"""HTTP-backed parsing, generation, and embeddings.

Adapters for OpenAI-style chat and embedding endpoints.  Endpoints are
configured through environment variables and every client accepts an
injectable ``httpx`` transport so tests can run fully offline.  Network
or protocol failures surface as :class:`TransportError`; a reply that
arrives but does not decode into valid frames degrades to the single
``irrelevant`` frame instead of crashing the dialogue.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from importlib import resources

import httpx

from ..frames import CustomerFrame, Frame, FrameError, ManagerFrame
from ..terms import Struct, to_text

__all__ = [
    "ChatClient",
    "EmbeddingClient",
    "LLMConfig",
    "LLMGenerator",
    "LLMParser",
    "TransportError",
    "load_prompt",
]


class TransportError(Exception):
    """The remote endpoint could not be reached or answered garbage."""


@dataclass(frozen=True)
class LLMConfig:
    url: str
    model: str = "default"
    api_key: str | None = None
    timeout: float = 30.0

    @classmethod
    def from_env(cls, prefix: str = "DUOTALK_LLM") -> "LLMConfig | None":
        url = os.environ.get(f"{prefix}_URL")
        if not url:
            return None
        return cls(
            url=url,
            model=os.environ.get(f"{prefix}_MODEL", "default"),
            api_key=os.environ.get(f"{prefix}_API_KEY"),
        )


def load_prompt(name: str) -> str:
    path = resources.files("duotalk") / "data" / "prompts" / f"{name}.txt"
    return path.read_text(encoding="utf-8")


def _headers(config: LLMConfig) -> dict[str, str]:
    headers = {"Content-Type": "application/json"}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"
    return headers


class ChatClient:
    """Minimal chat-completions caller."""

    def __init__(self, config: LLMConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._client = httpx.Client(transport=transport, timeout=config.timeout)

    def complete(self, system: str, user: str) -> str:
        payload = {
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        }
        try:
            response = self._client.post(
                self.config.url, json=payload, headers=_headers(self.config)
            )
            response.raise_for_status()
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, TypeError, ValueError) as exc:
            raise TransportError(f"chat endpoint failed: {exc}") from exc

    def close(self) -> None:
        self._client.close()


class EmbeddingClient:
    """Minimal embeddings caller used for fuzzy name correction."""

    def __init__(self, config: LLMConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._client = httpx.Client(transport=transport, timeout=config.timeout)

    def embed(self, texts: list[str]) -> list[list[float]]:
        payload = {"model": self.config.model, "input": list(texts)}
        try:
            response = self._client.post(
                self.config.url, json=payload, headers=_headers(self.config)
            )
            response.raise_for_status()
            body = response.json()
            vectors = [item["embedding"] for item in body["data"]]
        except (httpx.HTTPError, KeyError, IndexError, TypeError, ValueError) as exc:
            raise TransportError(f"embedding endpoint failed: {exc}") from exc
        if len(vectors) != len(texts):
            raise TransportError(
                f"embedding endpoint returned {len(vectors)} vectors for {len(texts)} inputs"
            )
        return vectors

    def close(self) -> None:
        self._client.close()


def _decode_frames(role: str, text: str) -> list[Frame] | None:
    """JSON reply → validated frames, or None when undecodable."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError:
        return None
    if not isinstance(raw, list):
        return None
    build = ManagerFrame if role == "manager" else CustomerFrame
    frames: list[Frame] = []
    for item in raw:
        if not isinstance(item, dict) or not isinstance(item.get("name"), str):
            return None
        args = item.get("args", [])
        if not isinstance(args, list):
            return None
        cleaned = tuple(a if isinstance(a, int) else str(a) for a in args)
        try:
            frames.append(build(item["name"], cleaned))
        except FrameError:
            return None
    return frames or None


class LLMParser:
    """Chat-model frame extraction with strict schema validation."""

    def __init__(self, role: str, client: ChatClient):
        if role not in ("manager", "customer"):
            raise ValueError(f"unknown role {role!r}")
        self.role = role
        self.client = client
        self.system_prompt = load_prompt(f"{role}_parser")

    def parse(self, utterance: str, context) -> list[Frame]:
        lines = [f"Utterance: {utterance}"]
        ask = getattr(context, "open_question", None)
        if ask is not None:
            lines.append(f"Open question: {to_text(ask)}")
        rec = getattr(context, "last_recommendation", None)
        if rec:
            lines.append(f"Last recommendation: {rec}")
        ordered = getattr(context, "ordered_foods", ())
        if ordered:
            lines.append("Current order: " + ", ".join(ordered))
        reply = self.client.complete(self.system_prompt, "\n".join(lines))
        frames = _decode_frames(self.role, reply)
        if frames is None:
            build = ManagerFrame if self.role == "manager" else CustomerFrame
            return [build("irrelevant")]
        return frames


class LLMGenerator:
    """Chat-model verbalization of response predicates."""

    def __init__(self, role: str, client: ChatClient):
        if role not in ("manager", "customer"):
            raise ValueError(f"unknown role {role!r}")
        self.role = role
        self.client = client
        self.system_prompt = load_prompt("response_generator")

    def generate(self, predicates: list[Struct]) -> str:
        rendered = " ".join(to_text(p) + "." for p in predicates)
        user = f"Role: {self.role}\nPredicates: {rendered}"
        return self.client.complete(self.system_prompt, user).strip()
