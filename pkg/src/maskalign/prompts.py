"""Class text bank: the per-class prompt material for the text encoder.

Each foreground class contributes its canonical name, optional synonyms,
and an optional free-text description; a shared template wraps each entry
into a full prompt. Background entries give the classifier somewhere to put
non-object regions and are folded into a single reserved class.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .text import ClassVocabulary

BACKGROUND = "__background__"

PLACEHOLDER = "{CLASS}"

TEMPLATE_PRESETS = {
    "identity": "{CLASS}",
    "photo": "A photo of a {CLASS}",
    "satellite": "A satellite image of {CLASS}",
    "topview": "Top view of a {CLASS}",
}

DEFAULT_TEMPLATE = TEMPLATE_PRESETS["topview"]

_PROMPT_KIND_ORDER = {"original": 0, "synonym": 1, "description": 2}


@dataclass
class ClassEntry:
    class_id: str
    name: str
    synonyms: list[str] = field(default_factory=list)
    description: str | None = None
    verbatim: bool = True


@dataclass
class PromptEntry:
    """One rendered prompt string plus the class it scores for."""

    class_id: str
    kind: str  # original | synonym | description | background
    text: str


@dataclass
class ClassTextBank:
    classes: list[ClassEntry]
    backgrounds: list[str] = field(default_factory=list)
    template: str = DEFAULT_TEMPLATE
    unseen: list[str] = field(default_factory=list)

    def class_ids(self) -> list[str]:
        return [c.class_id for c in self.classes]

    def all_class_ids(self) -> list[str]:
        """Foreground ids plus the reserved background id when applicable."""
        ids = self.class_ids()
        if self.backgrounds:
            ids.append(BACKGROUND)
        return ids

    def vocabulary(self) -> ClassVocabulary:
        """Surface forms (name + synonyms) per class, for expression matching."""
        return ClassVocabulary(
            {c.class_id: [c.name] + list(c.synonyms) for c in self.classes}
        )


def _validate_template(template: str) -> str:
    if template.count(PLACEHOLDER) != 1:
        raise ConfigError(
            f"template must contain the placeholder {PLACEHOLDER} exactly once, "
            f"got {template!r}"
        )
    return template


def build_bank(config: dict) -> ClassTextBank:
    """Build and validate a bank from a parsed config mapping.

    Raises ConfigError naming the offending key on duplicate ids, missing
    names, malformed templates, background/foreground collisions, or
    unknown unseen entries.
    """
    template = _validate_template(str(config.get("template", DEFAULT_TEMPLATE)))
    raw_classes = config.get("classes")
    if not raw_classes:
        raise ConfigError("bank config needs a non-empty 'classes' list")
    classes = []
    seen_ids = set()
    for i, raw in enumerate(raw_classes):
        name = raw.get("name")
        if not name:
            raise ConfigError(f"classes[{i}] is missing 'name'")
        class_id = str(raw.get("id", name))
        if class_id in seen_ids:
            raise ConfigError(f"duplicate class id {class_id!r}")
        seen_ids.add(class_id)
        if class_id == BACKGROUND:
            raise ConfigError(f"class id {class_id!r} is reserved")
        classes.append(ClassEntry(
            class_id=class_id,
            name=str(name),
            synonyms=[str(s) for s in raw.get("synonyms", [])],
            description=raw.get("description"),
            verbatim=bool(raw.get("verbatim", True)),
        ))
    backgrounds = [str(b) for b in config.get("backgrounds", [])]
    names = {c.name.lower() for c in classes}
    for b in backgrounds:
        if b.lower() in names:
            raise ConfigError(f"background {b!r} collides with a foreground class name")
    unseen = [str(u) for u in config.get("unseen", [])]
    for u in unseen:
        if u not in seen_ids:
            raise ConfigError(f"unseen entry {u!r} is not a declared class id")
    return ClassTextBank(classes=classes, backgrounds=backgrounds,
                         template=template, unseen=unseen)


def load_bank(path: str | Path) -> ClassTextBank:
    path = Path(path)
    try:
        config = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read bank file {path}: {exc}") from exc
    return build_bank(config)


def bank_to_dict(bank: ClassTextBank) -> dict:
    return {
        "template": bank.template,
        "classes": [
            {
                "id": c.class_id,
                "name": c.name,
                "synonyms": list(c.synonyms),
                **({"description": c.description, "verbatim": c.verbatim}
                   if c.description else {}),
            }
            for c in bank.classes
        ],
        "backgrounds": list(bank.backgrounds),
        "unseen": list(bank.unseen),
    }


def save_bank(bank: ClassTextBank, path: str | Path) -> None:
    Path(path).write_text(json.dumps(bank_to_dict(bank), indent=2, sort_keys=True) + "\n")


def render_template(template: str, text: str) -> str:
    return template.replace(PLACEHOLDER, text)


def render_prompts(bank: ClassTextBank) -> list[PromptEntry]:
    """Expand the bank into an ordered prompt list.

    Foreground entries are ordered by class id, then original before
    synonyms before description; background entries come last. Descriptions
    marked verbatim skip the template (they are full clauses already).
    """
    entries: list[PromptEntry] = []
    for entry in sorted(bank.classes, key=lambda c: c.class_id):
        entries.append(PromptEntry(entry.class_id, "original",
                                   render_template(bank.template, entry.name)))
        for syn in entry.synonyms:
            entries.append(PromptEntry(entry.class_id, "synonym",
                                       render_template(bank.template, syn)))
        if entry.description:
            text = (entry.description if entry.verbatim
                    else render_template(bank.template, entry.description))
            entries.append(PromptEntry(entry.class_id, "description", text))
    for bg in bank.backgrounds:
        entries.append(PromptEntry(BACKGROUND, "background",
                                   render_template(bank.template, bg)))
    return entries


def load_packaged_bank(name: str) -> ClassTextBank:
    """Load one of the bank fixtures shipped with the package."""
    ref = resources.files("maskalign.data").joinpath(f"{name}_bank.json")
    try:
        config = json.loads(ref.read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"no packaged bank named {name!r}") from exc
    return build_bank(config)
