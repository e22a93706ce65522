"""Prompt construction, sampled completion, and payload extraction.

Four prompting modes share one block layout: a mode header, two blank
lines, k worked examples, one blank line between blocks, and the test
problem ending with an open <EVALUATE> tag.  The stop token closes
that tag, so a completion is everything the model writes inside it.
"""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass
from importlib import resources

import requests

MODES = ("naive", "scratchpad", "cot", "linc")

STOP_TOKEN = "</EVALUATE>"

_COMMON_HEADER = (
    "The following is a first-order logic (FOL) problem.\n"
    "The problem is to determine whether the conclusion follows from the premises.\n"
    "The premises are given in the form of a set of first-order logic sentences.\n"
    "The conclusion is given in the form of a single first-order logic sentence.\n"
)

HEADERS = {
    "naive": _COMMON_HEADER
    + "The task is to evaluate the conclusion as 'True', 'False', or "
      "'Uncertain' given the premises.\n",
    "scratchpad": _COMMON_HEADER
    + "The task is to translate each of the premises and conclusions into "
      "FOL expressions, and then to evaluate the conclusion as 'True', "
      "'False', or 'Uncertain' given the premises.\n",
    "cot": _COMMON_HEADER
    + "The task is to translate each of the premises and conclusions into "
      "FOL expressions, \n",
    "linc": _COMMON_HEADER
    + "The task is to translate each of the premises and conclusions into "
      "FOL expressions, so that the expressions can be evaluated by a "
      "theorem solver to determine whether the conclusion follows from "
      "the premises.\nExpressions should be adhere to the format of the "
      "Python NLTK package logic module.\n",
}


@dataclass(frozen=True)
class GenConfig:
    temperature: float = 0.8
    n_samples: int = 10
    max_tokens: int = 1024
    stop_token: str = STOP_TOKEN
    k_shot: int = 8

    def __post_init__(self):
        if not 1 <= self.k_shot <= 8:
            raise ValueError("k_shot must be between 1 and 8")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")


def max_tokens_for_source(source: str) -> int:
    """Completion budget by dataset family: longer theories get 4096."""
    return 4096 if source.startswith("ProofWriter") else 1024


# ---------------------------------------------------------------------------
# in-context examples

@dataclass(frozen=True)
class IclExample:
    premises_nl: tuple
    conclusion_nl: str
    label: str
    premise_fols: tuple = ()
    conclusion_fol: str = ""
    cot: str = ""
    folio_train_index: int | None = None

    def pairs(self):
        texts = tuple(self.premises_nl) + (self.conclusion_nl,)
        fols = tuple(self.premise_fols) + (self.conclusion_fol,)
        return tuple(zip(texts, fols))


def default_bank() -> list[IclExample]:
    """The bundled eight-example bank, in prompt order."""
    raw = resources.files("folinfer").joinpath("data/icl_bank.json").read_text("utf-8")
    out = []
    for entry in json.loads(raw):
        out.append(IclExample(
            premises_nl=tuple(entry["premises_nl"]),
            conclusion_nl=entry["conclusion_nl"],
            label=entry["label"],
            premise_fols=tuple(entry["premise_fols"]),
            conclusion_fol=entry["conclusion_fol"],
            cot=entry["cot"],
            folio_train_index=entry.get("folio_train_index"),
        ))
    return out


# ---------------------------------------------------------------------------
# prompt assembly

def _evaluate_body(mode: str, ex: IclExample) -> str:
    if mode == "naive":
        return f"{ex.label}\n"
    if mode == "scratchpad":
        lines = [f"TEXT:\t{t}\nFOL:\t{f}\n" for t, f in ex.pairs()]
        return "".join(lines) + f"ANSWER:\t{ex.label}\n"
    if mode == "cot":
        return f"{ex.cot}\nANSWER:\t{ex.label}\n"
    if mode == "linc":
        return "".join(f"TEXT:\t{t}\nFOL:\t{f}\n" for t, f in ex.pairs())
    raise ValueError(f"unknown mode {mode!r}")


def _problem_block(premises_nl, conclusion_nl: str) -> str:
    lines = ["<PREMISES>\n"]
    for p in premises_nl:
        lines.append(p + "\n")
    lines.append("</PREMISES>\n<CONCLUSION>\n")
    lines.append(conclusion_nl + "\n")
    lines.append("</CONCLUSION>\n<EVALUATE>\n")
    return "".join(lines)


def build_prompt(mode: str, premises_nl, conclusion_nl: str,
                 bank=None, k_shot: int = 8) -> str:
    """Assemble the full prompt for one problem.  The first k_shot bank
    entries appear as worked examples; the prompt ends with the test
    problem's open <EVALUATE> line.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    bank = default_bank() if bank is None else list(bank)
    if not 1 <= k_shot <= len(bank):
        raise ValueError(f"k_shot must be between 1 and {len(bank)}")

    parts = [HEADERS[mode], "\n\n"]
    for ex in bank[:k_shot]:
        parts.append(_problem_block(ex.premises_nl, ex.conclusion_nl))
        parts.append(_evaluate_body(mode, ex))
        parts.append("</EVALUATE>\n\n")
    parts.append(_problem_block(premises_nl, conclusion_nl))
    return "".join(parts)


# ---------------------------------------------------------------------------
# payload extraction

@dataclass(frozen=True)
class DirectLabel:
    label: str


@dataclass(frozen=True)
class FolProgram:
    premise_fols: tuple
    conclusion_fol: str


@dataclass(frozen=True)
class ExtractFailure:
    reason: str


_LABEL_RE = re.compile(r"(true|false|uncertain)[\s.!?,;:]*", re.IGNORECASE)


def _parse_label(text: str) -> str | None:
    m = _LABEL_RE.fullmatch(text.strip())
    if m is None:
        return None
    return m.group(1).capitalize()


def extract(mode: str, completion: str):
    """Pull the mode's payload out of one completion: a DirectLabel for
    naive/scratchpad/cot, a FolProgram for linc, or an ExtractFailure.
    """
    lines = completion.splitlines()
    if mode == "naive":
        for line in lines:
            if line.strip():
                label = _parse_label(line)
                if label is None:
                    return ExtractFailure("unrecognized label")
                return DirectLabel(label)
        return ExtractFailure("no label found")
    if mode in ("scratchpad", "cot"):
        answers = [l for l in lines if l.startswith("ANSWER:")]
        if not answers:
            return ExtractFailure("no ANSWER line")
        label = _parse_label(answers[-1][len("ANSWER:"):])
        if label is None:
            return ExtractFailure("unrecognized label")
        return DirectLabel(label)
    if mode == "linc":
        fols = [l[len("FOL:"):].strip() for l in lines if l.startswith("FOL:")]
        fols = [f for f in fols if f]
        if not fols:
            return ExtractFailure("no FOL lines")
        return FolProgram(tuple(fols[:-1]), fols[-1])
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# generation clients

class GenerationTransportError(RuntimeError):
    """The completion backend failed after all retries."""


class ReplayCacheMiss(RuntimeError):
    """The replay fixture has no entry for the requested key."""


@dataclass(frozen=True)
class GenerationSample:
    index: int
    raw: str
    payload: object = None


class StubClient:
    """Returns scripted completions; cycles when the script runs out."""

    def __init__(self, completions):
        self.completions = list(completions)
        if not self.completions:
            raise ValueError("stub needs at least one completion")
        self._cursor = 0

    def complete(self, prompt: str, cfg: GenConfig, *, problem_id=None,
                 mode=None) -> list[str]:
        out = []
        for _ in range(cfg.n_samples):
            out.append(self.completions[self._cursor % len(self.completions)])
            self._cursor += 1
        return out


class ReplayClient:
    """Serves completions recorded in a JSONL fixture, one record per
    sample: {problem_id, mode, sample_index, completion}.
    """

    def __init__(self, fixture_path: str):
        self.fixture_path = fixture_path
        self._table: dict[tuple, str] = {}
        with open(fixture_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                key = (row["problem_id"], row["mode"], row["sample_index"])
                if key in self._table:
                    raise ValueError(
                        f"{fixture_path}:{lineno}: duplicate fixture key {key!r}")
                self._table[key] = row["completion"]

    def complete(self, prompt: str, cfg: GenConfig, *, problem_id=None,
                 mode=None) -> list[str]:
        out = []
        for i in range(cfg.n_samples):
            key = (problem_id, mode, i)
            if key not in self._table:
                raise ReplayCacheMiss(
                    f"no recorded completion for problem {problem_id!r}, "
                    f"mode {mode!r}, sample {i}")
            out.append(self._table[key])
        return out


class HttpClient:
    """Chat-completions client for an OpenAI-style endpoint.

    Connection settings come from arguments or the environment:
    GENERATOR_BASE_URL, GENERATOR_API_KEY, GENERATOR_MODEL.
    """

    def __init__(self, base_url=None, api_key=None, model=None,
                 timeout: float = 120.0, max_retries: int = 5):
        self.base_url = base_url or os.environ.get("GENERATOR_BASE_URL")
        self.api_key = api_key or os.environ.get("GENERATOR_API_KEY", "")
        self.model = model or os.environ.get("GENERATOR_MODEL")
        if not self.base_url or not self.model:
            raise ValueError(
                "HttpClient needs a base URL and model, via arguments or "
                "GENERATOR_BASE_URL / GENERATOR_MODEL")
        self.timeout = timeout
        self.max_retries = max_retries

    def complete(self, prompt: str, cfg: GenConfig, *, problem_id=None,
                 mode=None) -> list[str]:
        url = self.base_url.rstrip("/") + "/chat/completions"
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
            "n": cfg.n_samples,
            "stop": [cfg.stop_token],
        }
        last_error = None
        for attempt in range(self.max_retries):
            try:
                resp = requests.post(url, json=body, headers=headers,
                                     timeout=self.timeout)
                if resp.status_code in (429,) or resp.status_code >= 500:
                    last_error = f"HTTP {resp.status_code}"
                elif resp.status_code != 200:
                    raise GenerationTransportError(
                        f"completion request failed: HTTP {resp.status_code}: "
                        f"{resp.text[:200]}")
                else:
                    data = resp.json()
                    return [c["message"]["content"] for c in data["choices"]]
            except GenerationTransportError:
                raise
            except (requests.RequestException, KeyError, ValueError) as exc:
                last_error = repr(exc)
            time.sleep(min(2 ** attempt, 10))
        raise GenerationTransportError(
            f"completion request failed after {self.max_retries} attempts: "
            f"{last_error}")


def truncate_at_stop(text: str, stop_token: str) -> str:
    cut = text.find(stop_token)
    return text if cut < 0 else text[:cut]


def generate(client, prompt: str, cfg: GenConfig, *, mode: str,
             problem_id=None) -> list[GenerationSample]:
    """Draw cfg.n_samples completions and attach extracted payloads.
    Completions are truncated at the stop token in case the backend
    echoed it.
    """
    raw = client.complete(prompt, cfg, problem_id=problem_id, mode=mode)
    if len(raw) != cfg.n_samples:
        raise GenerationTransportError(
            f"backend returned {len(raw)} completions, expected {cfg.n_samples}")
    samples = []
    for i, text in enumerate(raw):
        body = truncate_at_stop(text, cfg.stop_token)
        samples.append(GenerationSample(index=i, raw=body,
                                        payload=extract(mode, body)))
    return samples
