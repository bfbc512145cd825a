"""Adapter configuration and input-file readers.

The adapter does no morphology of its own: base and derivative strings come
verbatim from the TSV produced upstream, and prompts from the prompts JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional


class Mode:
    LOGPROB = "logprob"
    FORCED_CHOICE = "forced_choice"


@dataclass
class AdapterConfig:
    model_id: str
    prompts_path: str
    bases_path: str
    mode: str = Mode.LOGPROB
    batch_size: int = 16
    device: str = "cpu"
    # tokenizers fold a leading space into word tokens; when the prompt does
    # not end in whitespace we prepend one to the continuation
    leading_space: bool = True
    length_normalize: bool = False
    max_retries: int = 3
    record_model_id: Optional[str] = None

    def output_model_id(self) -> str:
        return self.record_model_id or self.model_id


@dataclass(frozen=True)
class Prompt:
    id: str
    text: str
    kind: str

    def fill(self, value: str) -> str:
        out = self.text
        if "{base}" in out:
            out = out.replace("{base}", value)
        if "{word}" in out:
            out = out.replace("{word}", value)
        return out


@dataclass(frozen=True)
class BaseRow:
    base: str
    cls: str
    d_ity: str
    d_ness: str


@dataclass(frozen=True)
class WordRow:
    word: str
    frequency: int = 0
    familiarity: float = 1.0
    is_complex: bool = False


def load_prompts(path, kind: Optional[str] = None) -> list[Prompt]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    prompts = [Prompt(d["id"], d["text"], d["kind"]) for d in raw]
    if kind is not None:
        prompts = [p for p in prompts if p.kind == kind]
    if not prompts:
        raise ValueError(f"no prompts of kind {kind!r} in {path}")
    return prompts


def load_bases(path) -> list[BaseRow]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != ["base", "class", "d_ity", "d_ness"]:
            raise ValueError(f"{path}: unexpected header {header}")
        for lineno, line in enumerate(fh, 2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 columns")
            rows.append(BaseRow(*parts))
    if not rows:
        raise ValueError(f"{path}: no base rows")
    return rows


def load_words(path) -> list[WordRow]:
    """Word list with optional frequency / familiarity / complexity columns."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header[0] != "word":
            raise ValueError(f"{path}: first column must be 'word'")
        idx = {name: i for i, name in enumerate(header)}
        for lineno, line in enumerate(fh, 2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            rows.append(
                WordRow(
                    word=parts[idx["word"]],
                    frequency=int(parts[idx["frequency"]]) if "frequency" in idx else 0,
                    familiarity=float(parts[idx["familiarity"]]) if "familiarity" in idx else 1.0,
                    is_complex=(
                        parts[idx["is_complex"]].lower() in ("1", "true", "yes")
                        if "is_complex" in idx
                        else False
                    ),
                )
            )
    if not rows:
        raise ValueError(f"{path}: no word rows")
    return rows
