"""Symbolic queries over a scene graph and prompt assembly for an LLM.

Three query kinds are supported. COUNT tallies instances matching a
class and/or color filter. RELATION lists the edges running from one
referenced instance to another. ATTRIBUTE reads a single named field
off a referenced instance. References select by class name with an
ordinal over matches sorted largest-first.

``build_prompt`` renders the graph into a plain-text prompt: an
intrinsic block (one line per relevant instance) and an extrinsic block
(one line per relevant edge), framed by a fixed instruction template so
the text is reproducible byte for byte. ``relay_to_llm`` posts a
rendered prompt to an OpenAI-compatible chat endpoint; it is the only
function in the package that touches the network, and it refuses to
before credentials are found.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import urllib.error
import urllib.request
from dataclasses import dataclass
from enum import Enum

from .errors import ConfigError, InvalidQueryError, SelectorError, TransportError
from .knowledge import InstanceKnowledge, RelationEdge, SceneGraph

log = logging.getLogger("symscene.llm")

PROMPT_HEADER = "[scene-qa/v1] You are given symbolic knowledge extracted from an image."
PROMPT_FOOTER = "Answer the question using only the knowledge stated above."


class QueryKind(Enum):
    COUNT = "count"
    RELATION = "relation"
    ATTRIBUTE = "attribute"


@dataclass(frozen=True)
class InstanceRef:
    """Reference to one instance: class name plus ordinal among matches.

    Matches are ordered by pixel area descending (id ascending on ties),
    so ordinal 0 is the largest instance of the class.
    """

    class_label: str
    ordinal: int = 0


ATTRIBUTE_NAMES = tuple(f.name for f in dataclasses.fields(InstanceKnowledge))


@dataclass(frozen=True)
class SymbolicQuery:
    kind: QueryKind
    class_filter: str | None = None
    color_filter: str | None = None
    subject_ref: InstanceRef | None = None
    object_ref: InstanceRef | None = None
    attribute: str | None = None

    def validate(self) -> None:
        if self.kind is QueryKind.COUNT:
            if self.class_filter is None and self.color_filter is None:
                raise InvalidQueryError("COUNT requires a class or color filter")
        elif self.kind is QueryKind.RELATION:
            if self.subject_ref is None or self.object_ref is None:
                raise InvalidQueryError("RELATION requires subject and object references")
        elif self.kind is QueryKind.ATTRIBUTE:
            if self.subject_ref is None:
                raise InvalidQueryError("ATTRIBUTE requires a subject reference")
            if self.attribute not in ATTRIBUTE_NAMES:
                raise InvalidQueryError(
                    f"unknown attribute {self.attribute!r}; "
                    f"expected one of {', '.join(ATTRIBUTE_NAMES)}"
                )


def resolve_selector(
    instances: list[InstanceKnowledge], ref: InstanceRef
) -> InstanceKnowledge:
    """The instance a reference points at, or SelectorError."""
    wanted = ref.class_label.lower()
    matches = [k for k in instances if k.class_label.lower() == wanted]
    if not matches:
        classes = sorted({k.class_label for k in instances})
        raise SelectorError(
            f"no instance of class {ref.class_label!r}; "
            f"available: {', '.join(classes) if classes else '(none)'}"
        )
    matches.sort(key=lambda k: (-k.area_px, k.id))
    if not 0 <= ref.ordinal < len(matches):
        raise SelectorError(
            f"ordinal {ref.ordinal} out of range: "
            f"{len(matches)} instance(s) of class {ref.class_label!r}"
        )
    return matches[ref.ordinal]


def _matches_filters(
    k: InstanceKnowledge, class_filter: str | None, color_filter: str | None
) -> bool:
    if class_filter is not None and k.class_label.lower() != class_filter.lower():
        return False
    if color_filter is not None and k.color_name.lower() != color_filter.lower():
        return False
    return True


def answer_query(graph: SceneGraph, query: SymbolicQuery):
    """Evaluate the query against the graph.

    Returns an int for COUNT, the matching edges (graph order) for
    RELATION, and the raw field value for ATTRIBUTE.
    """
    query.validate()
    if query.kind is QueryKind.COUNT:
        return sum(
            1
            for k in graph.instances
            if _matches_filters(k, query.class_filter, query.color_filter)
        )
    if query.kind is QueryKind.RELATION:
        subject = resolve_selector(graph.instances, query.subject_ref)
        obj = resolve_selector(graph.instances, query.object_ref)
        return [
            e
            for e in graph.relations
            if e.subject_id == subject.id and e.object_id == obj.id
        ]
    subject = resolve_selector(graph.instances, query.subject_ref)
    return getattr(subject, query.attribute)


def format_answer(answer) -> str:
    """Deterministic text form of an answer for printing."""
    if isinstance(answer, list):
        if not answer:
            return "(none)"
        return "; ".join(
            f"#{e.subject_id} {e.phrase} #{e.object_id}" for e in answer
        )
    if isinstance(answer, float):
        return format(answer, ".6g")
    if isinstance(answer, tuple):
        return "(" + ", ".join(format(v, ".6g") for v in answer) + ")"
    return str(answer)


@dataclass(frozen=True)
class PromptBundle:
    question: str
    instance_ids: tuple[int, ...]
    text: str


def _instance_line(k: InstanceKnowledge) -> str:
    return (
        f"#{k.id} {k.color_name} {k.class_label}, "
        f"area {k.area_frac * 100.0:.1f}%, depth {k.mean_depth:.3f}"
    )


def _edge_line(e: RelationEdge) -> str:
    return f"#{e.subject_id} {e.phrase} #{e.object_id}"


def build_prompt(
    graph: SceneGraph, question: str, query: SymbolicQuery | None = None
) -> PromptBundle:
    """Render graph knowledge relevant to the question into prompt text.

    With a query, relevance is the union of filter matches and resolved
    references; without one (or when the query constrains nothing), every
    instance is relevant. Edges are kept when both endpoints are.
    """
    relevant: set[int] = set()
    restricted = False
    if query is not None:
        if query.class_filter is not None or query.color_filter is not None:
            restricted = True
            relevant |= {
                k.id
                for k in graph.instances
                if _matches_filters(k, query.class_filter, query.color_filter)
            }
        for ref in (query.subject_ref, query.object_ref):
            if ref is not None:
                restricted = True
                relevant.add(resolve_selector(graph.instances, ref).id)
    if not restricted:
        relevant = {k.id for k in graph.instances}

    kept = [k for k in graph.instances if k.id in relevant]
    kept_edges = [
        e
        for e in graph.relations
        if e.subject_id in relevant and e.object_id in relevant
    ]

    lines = [PROMPT_HEADER, f"Question: {question}", "Intrinsic knowledge:"]
    if kept:
        lines.extend(_instance_line(k) for k in kept)
    else:
        lines.append("(none)")
    lines.append("Extrinsic knowledge:")
    if kept_edges:
        lines.extend(_edge_line(e) for e in kept_edges)
    else:
        lines.append("(none)")
    lines.append(PROMPT_FOOTER)
    return PromptBundle(
        question=question,
        instance_ids=tuple(k.id for k in kept),
        text="\n".join(lines),
    )


DEFAULT_BASE_URL = "https://api.openai.com/v1"
DEFAULT_MODEL = "gpt-4o"


@dataclass(frozen=True)
class LlmConfig:
    api_key: str
    base_url: str = DEFAULT_BASE_URL
    model: str = DEFAULT_MODEL

    @classmethod
    def from_env(cls, env=None) -> "LlmConfig":
        """Build a config from LLM_API_KEY / LLM_BASE_URL / LLM_MODEL."""
        if env is None:
            env = os.environ
        key = env.get("LLM_API_KEY", "")
        if not key:
            raise ConfigError("LLM_API_KEY is not set")
        return cls(
            api_key=key,
            base_url=env.get("LLM_BASE_URL") or DEFAULT_BASE_URL,
            model=env.get("LLM_MODEL") or DEFAULT_MODEL,
        )


def relay_to_llm(
    prompt: PromptBundle | str,
    config: LlmConfig | None = None,
    timeout: float = 30.0,
) -> str:
    """Send a rendered prompt to a chat-completions endpoint, return the reply.

    Credentials come from the config (or the environment when none is
    given); a missing key raises ConfigError before any connection is
    attempted. The API key never reaches the log.
    """
    cfg = config or LlmConfig.from_env()
    text = prompt.text if isinstance(prompt, PromptBundle) else prompt
    url = cfg.base_url.rstrip("/") + "/chat/completions"
    body = {
        "model": cfg.model,
        "messages": [{"role": "user", "content": text}],
    }
    request = urllib.request.Request(
        url,
        data=json.dumps(body).encode("utf-8"),
        headers={
            "Content-Type": "application/json",
            "Authorization": f"Bearer {cfg.api_key}",
        },
        method="POST",
    )
    log.info("POST %s model=%s authorization=Bearer ***", url, cfg.model)
    try:
        with urllib.request.urlopen(request, timeout=timeout) as response:
            payload = response.read()
    except urllib.error.HTTPError as exc:
        detail = exc.read(500).decode("utf-8", errors="replace")
        raise TransportError(
            f"chat endpoint returned HTTP {exc.code}: {detail}", status=exc.code
        ) from exc
    except urllib.error.URLError as exc:
        raise TransportError(f"chat endpoint unreachable: {exc.reason}") from exc

    try:
        doc = json.loads(payload.decode("utf-8"))
        content = doc["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise TransportError(f"malformed chat response: {exc}") from exc
    if not isinstance(content, str):
        raise TransportError("malformed chat response: content is not text")
    log.info("received %d bytes", len(payload))
    return content
