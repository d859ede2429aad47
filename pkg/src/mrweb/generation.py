"""Driving multimodal chat models to produce webpage code from designs.

Four prompting strategies are supported; all except the self-contained
baseline embed the page's action list (the serialized resource entries) in
the prompt. The chat endpoint is any HTTP service accepting a message-list
request with an image attachment; rendering is delegated to an external
command configured as a placeholder template.
"""

from __future__ import annotations

import base64
import json
import os
import re
import shlex
import subprocess
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Optional

import httpx

from .resources import ResourceList, serialize_action_list


class PromptError(ValueError):
    """A strategy's required substitution input is missing or extraneous."""


class GenerationError(RuntimeError):
    """The model reply could not be turned into HTML; carries the transcript."""

    def __init__(self, message: str, transcript: Optional["Transcript"] = None):
        super().__init__(message)
        self.transcript = transcript


class TransportError(RuntimeError):
    """The chat endpoint stayed unreachable or kept refusing credentials."""


class RenderError(RuntimeError):
    """The external renderer failed; carries its captured output."""


class PromptStrategy(str, Enum):
    SELF_CONTAINED = "self-contained"
    ZERO_SHOT = "zero-shot"
    CHAIN_OF_THOUGHT = "chain-of-thought"
    SELF_REFINE = "self-refine"


_ACTION_LIST_FORMAT = (
    "{\n"
    '    "position": bounding box of format [[x1, y1], [x2, y2]], specifying the '
    "top left corner and the bottom right corner of the element;\n"
    '    "type": element type;\n'
    '    "url": url of the element;\n'
    "}"
)

_SELF_CONTAINED_TEMPLATE = (
    "Here is a screenshot of a web page. Please write an HTML and Tailwind CSS "
    "to make it look exactly like the original web page. Pay attention to "
    "things like size, text, position, and color of all the elements, as well "
    "as the overall layout. Respond with the content of the HTML+tail-wind CSS "
    "code."
)

_ZERO_SHOT_TEMPLATE = (
    'Here is a screenshot of a web page and its "action list" which specifies '
    "the links and images in the webpage. Please write an HTML and Tailwind "
    "CSS to make it look exactly like the original web page. Pay attention to "
    "things like size, text, position, and color of all the elements, as well "
    "as the overall layout. The format of the action list is as follows:\n"
    f"{_ACTION_LIST_FORMAT}\n"
    "The action list is as follows:\n[ACTION LIST]"
)

_CHAIN_OF_THOUGHT_TEMPLATE = (
    'Here is a screenshot of a web page and its "action list" which specifies '
    "the links and images in the webpage. Please write a HTML and Tailwind CSS "
    "to make it look exactly like the original web page. Please think step by "
    "step, and pay attention to things like size, text, position, and color of "
    "all the elements, as well as the overall layout. The format of the action "
    "list is as follows:\n"
    f"{_ACTION_LIST_FORMAT}\n"
    "The action list is as follows:\n[ACTION LIST]"
)

_SELF_REFINE_TEMPLATE = (
    'Here is a screenshot of a web page and its "action list" which specifies '
    "the links and images in the webpage. I have an HTML file for implementing "
    "a webpage but it has some missing or wrong elements that are different "
    "from the original webpage. Please compare the two webpages and revise the "
    "original HTML implementation. Return a single piece of HTML and tail-wind "
    "CSS code to reproduce exactly the website. Pay attention to things like "
    "size, text, position, and color of all the elements, as well as the "
    "overall layout. Respond with the content of the HTML+tail-wind CSS code. "
    "The format of the action list is as follows:\n"
    f"{_ACTION_LIST_FORMAT}\n"
    "The current implementation I have is: [CODE] "
    "The action list is as follows: [ACTION LIST]"
)

_TEMPLATES = {
    PromptStrategy.SELF_CONTAINED: _SELF_CONTAINED_TEMPLATE,
    PromptStrategy.ZERO_SHOT: _ZERO_SHOT_TEMPLATE,
    PromptStrategy.CHAIN_OF_THOUGHT: _CHAIN_OF_THOUGHT_TEMPLATE,
    PromptStrategy.SELF_REFINE: _SELF_REFINE_TEMPLATE,
}


@dataclass(frozen=True)
class GenerationConfig:
    endpoint: str
    model: str
    temperature: float = 0.0
    seed: int = 42
    max_tokens: int = 4096
    credential_env: str = "MRWEB_API_KEY"
    refine_rounds: int = 1
    request_timeout: float = 120.0
    backoff_base: float = 0.5

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.refine_rounds < 0:
            raise ValueError("refine_rounds must be >= 0")


def build_prompt(
    strategy: PromptStrategy,
    screenshot_png: bytes,
    resources: Optional[ResourceList] = None,
    prior_code: Optional[str] = None,
) -> list[dict[str, Any]]:
    """Render the strategy's template into a one-message conversation.

    The action list and prior code are substituted into their placeholders;
    the screenshot rides along as a data-URI image attachment. Deterministic:
    identical inputs produce identical messages.
    """
    if strategy == PromptStrategy.SELF_CONTAINED:
        if resources is not None:
            raise PromptError("self-contained prompts take no resource list")
    elif resources is None:
        raise PromptError(f"[ACTION LIST] substitution missing for {strategy.value}")
    if strategy == PromptStrategy.SELF_REFINE:
        if prior_code is None:
            raise PromptError("[CODE] substitution missing for self-refine")
    elif prior_code is not None:
        raise PromptError(f"prior code is only meaningful for self-refine")

    text = _TEMPLATES[strategy]
    if resources is not None:
        text = text.replace("[ACTION LIST]", serialize_action_list(resources))
    if prior_code is not None:
        text = text.replace("[CODE]", prior_code)

    return [_user_message(text, screenshot_png)]


def _user_message(text: str, screenshot_png: bytes) -> dict[str, Any]:
    encoded = base64.b64encode(screenshot_png).decode("ascii")
    return {
        "role": "user",
        "content": [
            {"type": "text", "text": text},
            {
                "type": "image_url",
                "image_url": {"url": f"data:image/png;base64,{encoded}"},
            },
        ],
    }


_FENCED_BLOCK = re.compile(r"```[^\n`]*\n(.*?)```", re.DOTALL)


def extract_html(reply: str) -> str:
    """Pull HTML out of a model reply.

    Fenced code blocks win (the longest one when there are several); with no
    fences the reply is taken verbatim from its first '<'.
    """
    blocks = [m.group(1) for m in _FENCED_BLOCK.finditer(reply)]
    if blocks:
        return max(blocks, key=len).strip()
    start = reply.find("<")
    if start == -1:
        raise GenerationError("no HTML found in model reply")
    return reply[start:].strip()


@dataclass
class Transcript:
    """Full request/response history plus intermediate renders, replayable."""

    strategy: str
    model: str
    turns: list[dict[str, Any]] = field(default_factory=list)
    renders: list[dict[str, str]] = field(default_factory=list)
    seed_sent: Optional[int] = None
    seed_acknowledged: bool = False

    def to_json(self) -> str:
        return json.dumps(
            {
                "strategy": self.strategy,
                "model": self.model,
                "seed_sent": self.seed_sent,
                "seed_acknowledged": self.seed_acknowledged,
                "turns": self.turns,
                "renders": self.renders,
            },
            indent=2,
            ensure_ascii=False,
        ) + "\n"


_RETRIABLE_STATUSES = {401, 403, 408, 429, 500, 502, 503, 504}
_MAX_ATTEMPTS = 3


class ChatClient:
    """Minimal chat-completion client over HTTP.

    Request shape: {model, temperature, seed, max_tokens, messages}; reply
    text is read from choices[0].message.content. Credentials come from the
    environment variable named in the config and are sent as a bearer token.
    """

    def __init__(self, config: GenerationConfig):
        self.config = config

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        credential = os.environ.get(self.config.credential_env, "")
        if credential:
            headers["Authorization"] = f"Bearer {credential}"
        return headers

    def complete(self, messages: list[dict[str, Any]]) -> tuple[str, dict[str, Any]]:
        """Send one completion request; returns (reply text, raw response body)."""
        body = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "seed": self.config.seed,
            "max_tokens": self.config.max_tokens,
            "messages": messages,
        }
        last_error: Optional[str] = None
        for attempt in range(_MAX_ATTEMPTS):
            if attempt:
                time.sleep(self.config.backoff_base * (2 ** (attempt - 1)))
            try:
                response = httpx.post(
                    self.config.endpoint,
                    json=body,
                    headers=self._headers(),
                    timeout=self.config.request_timeout,
                )
            except httpx.HTTPError as exc:
                last_error = f"transport failure: {exc}"
                continue
            if response.status_code in _RETRIABLE_STATUSES:
                last_error = f"endpoint returned {response.status_code}"
                continue
            if response.status_code != 200:
                raise TransportError(
                    f"endpoint returned {response.status_code}: {response.text[:500]}"
                )
            data = response.json()
            try:
                reply = data["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError) as exc:
                raise TransportError(f"malformed endpoint reply: {exc}") from exc
            if not isinstance(reply, str):
                raise TransportError("endpoint reply content is not text")
            return reply, data
        raise TransportError(f"giving up after {_MAX_ATTEMPTS} attempts: {last_error}")


def _seed_acknowledged(response_body: dict[str, Any], seed: int) -> bool:
    if response_body.get("seed") == seed:
        return True
    return "system_fingerprint" in response_body


@dataclass(frozen=True)
class GenerationResult:
    html: str
    transcript: Transcript


RenderFn = Callable[[str, int], None]
"""Called with (current html, refine round index) between self-refine turns."""


def generate_page(
    screenshot_png: bytes,
    resources: Optional[ResourceList],
    strategy: PromptStrategy,
    config: GenerationConfig,
    chat: Optional[ChatClient] = None,
    render_intermediate: Optional[RenderFn] = None,
) -> GenerationResult:
    """Run one page through the chosen prompting strategy.

    Self-refine starts from a zero-shot turn, renders the draft, then feeds
    the current implementation back through the refine template for the
    configured number of rounds. Every request/response pair and render is
    recorded in the transcript.
    """
    client = chat or ChatClient(config)
    transcript = Transcript(
        strategy=strategy.value, model=config.model, seed_sent=config.seed
    )

    def run_turn(messages: list[dict[str, Any]]) -> str:
        reply, raw = client.complete(messages)
        transcript.turns.append(
            {"request": {"messages": messages}, "response": raw}
        )
        if _seed_acknowledged(raw, config.seed):
            transcript.seed_acknowledged = True
        return reply

    if strategy != PromptStrategy.SELF_REFINE:
        messages = build_prompt(strategy, screenshot_png, resources)
        reply = run_turn(messages)
        html = _extract_or_raise(reply, transcript)
        return GenerationResult(html=html, transcript=transcript)

    if resources is None:
        raise PromptError("[ACTION LIST] substitution missing for self-refine")

    conversation = build_prompt(PromptStrategy.ZERO_SHOT, screenshot_png, resources)
    reply = run_turn(conversation)
    html = _extract_or_raise(reply, transcript)

    for round_index in range(1, config.refine_rounds + 1):
        if render_intermediate is not None:
            render_intermediate(html, round_index)
            transcript.renders.append({"round": str(round_index)})
        refine_text = _SELF_REFINE_TEMPLATE.replace(
            "[ACTION LIST]", serialize_action_list(resources)
        ).replace("[CODE]", html)
        conversation = conversation + [
            {"role": "assistant", "content": reply},
            _user_message(refine_text, screenshot_png),
        ]
        reply = run_turn(conversation)
        html = _extract_or_raise(reply, transcript)

    return GenerationResult(html=html, transcript=transcript)


def _extract_or_raise(reply: str, transcript: Transcript) -> str:
    try:
        html = extract_html(reply)
    except GenerationError as exc:
        raise GenerationError(str(exc), transcript=transcript) from None
    if not html:
        raise GenerationError("model reply extracted to empty HTML", transcript=transcript)
    return html


@dataclass(frozen=True)
class RenderOutputs:
    png_path: Path
    geometry_path: Path


def render_page(
    html_path: Path,
    png_path: Path,
    geometry_path: Path,
    command_template: str,
    timeout: float = 60.0,
) -> RenderOutputs:
    """Run the external renderer command and verify its two artifacts.

    The template's {html}, {png}, and {geometry} placeholders are substituted
    per token, the command must exit 0 within the timeout, and both outputs
    must exist and parse.
    """
    from .htmlpipe import parse_geometry_dump
    from .raster import RasterImage

    substitutions = {
        "{html}": str(html_path),
        "{png}": str(png_path),
        "{geometry}": str(geometry_path),
    }
    argv = []
    for token in shlex.split(command_template):
        for placeholder, value in substitutions.items():
            token = token.replace(placeholder, value)
        argv.append(token)

    try:
        completed = subprocess.run(
            argv, capture_output=True, text=True, timeout=timeout
        )
    except subprocess.TimeoutExpired as exc:
        raise RenderError(f"renderer timed out after {timeout}s: {argv}") from exc
    except OSError as exc:
        raise RenderError(f"renderer failed to start: {exc}") from exc
    if completed.returncode != 0:
        raise RenderError(
            f"renderer exited {completed.returncode}\n"
            f"stdout: {completed.stdout}\nstderr: {completed.stderr}"
        )

    for path, label in ((png_path, "screenshot"), (geometry_path, "geometry dump")):
        if not path.exists():
            raise RenderError(f"renderer produced no {label} at {path}")
    try:
        RasterImage.load(png_path)
    except Exception as exc:
        raise RenderError(f"renderer screenshot unreadable: {exc}") from exc
    try:
        parse_geometry_dump(geometry_path.read_text(encoding="utf-8"))
    except Exception as exc:
        raise RenderError(f"renderer geometry dump unreadable: {exc}") from exc
    return RenderOutputs(png_path=png_path, geometry_path=geometry_path)
