"""Class text banks and prompt rendering."""

from __future__ import annotations

import json

import pytest

from maskalign.errors import ConfigError
from maskalign.prompts import (
    BACKGROUND,
    DEFAULT_TEMPLATE,
    TEMPLATE_PRESETS,
    ClassEntry,
    build_bank,
    bank_to_dict,
    load_bank,
    load_packaged_bank,
    render_prompts,
    save_bank,
)


def small_bank(**kwargs):
    classes = [
        {"id": "ship", "name": "ship", "synonyms": ["boat"],
         "description": "a vessel on open water"},
        {"id": "tank", "name": "storage tank", "synonyms": []},
    ]
    payload = {"classes": classes, "backgrounds": ["water"], "unseen": []}
    payload.update(kwargs)
    return build_bank(payload)


def test_render_counts_original_synonym_description():
    bank = small_bank()
    entries = render_prompts(bank)
    ship = [e for e in entries if e.class_id == "ship"]
    # original + 1 synonym + description
    assert [e.kind for e in ship] == ["original", "synonym", "description"]
    tank = [e for e in entries if e.class_id == "tank"]
    assert [e.kind for e in tank] == ["original"]
    bg = [e for e in entries if e.class_id == BACKGROUND]
    assert len(bg) == 1


def test_render_applies_template_to_names():
    bank = small_bank()
    entries = render_prompts(bank)
    originals = {e.class_id: e.text for e in entries if e.kind == "original"}
    assert originals["ship"] == "Top view of a ship"
    assert originals["tank"] == "Top view of a storage tank"


def test_default_template():
    assert DEFAULT_TEMPLATE == TEMPLATE_PRESETS["topview"]
    assert "{CLASS}" in DEFAULT_TEMPLATE


def test_verbatim_description_skips_template():
    bank = small_bank()
    entries = render_prompts(bank)
    desc = [e for e in entries if e.kind == "description"][0]
    assert desc.text == "a vessel on open water"


def test_templated_description_when_not_verbatim():
    classes = [{"id": "ship", "name": "ship", "synonyms": [],
                "description": "long hull", "verbatim": False}]
    bank = build_bank({"classes": classes, "backgrounds": [], "unseen": []})
    entries = render_prompts(bank)
    desc = [e for e in entries if e.kind == "description"][0]
    assert desc.text == "Top view of a long hull"


def test_backgrounds_render_last_through_template():
    bank = small_bank()
    entries = render_prompts(bank)
    assert entries[-1].class_id == BACKGROUND
    assert entries[-1].text == "Top view of a water"


def test_classes_sorted_by_id():
    bank = small_bank()
    entries = render_prompts(bank)
    fg_ids = [e.class_id for e in entries if e.class_id != BACKGROUND]
    firsts = list(dict.fromkeys(fg_ids))
    assert firsts == sorted(firsts)


def test_build_bank_rejects_duplicate_ids():
    classes = [
        {"id": "ship", "name": "ship"},
        {"id": "ship", "name": "boat"},
    ]
    with pytest.raises(ConfigError):
        build_bank({"classes": classes, "backgrounds": [], "unseen": []})


def test_build_bank_rejects_reserved_id():
    classes = [{"id": BACKGROUND, "name": "sky"}]
    with pytest.raises(ConfigError):
        build_bank({"classes": classes, "backgrounds": [], "unseen": []})


def test_build_bank_rejects_missing_name():
    with pytest.raises(ConfigError):
        build_bank({"classes": [{"id": "x", "name": ""}],
                    "backgrounds": [], "unseen": []})


def test_build_bank_rejects_bad_template():
    classes = [{"id": "ship", "name": "ship"}]
    with pytest.raises(ConfigError):
        build_bank({"classes": classes, "backgrounds": [], "unseen": [],
                    "template": "no placeholder here"})
    with pytest.raises(ConfigError):
        build_bank({"classes": classes, "backgrounds": [], "unseen": [],
                    "template": "{CLASS} and {CLASS}"})


def test_build_bank_rejects_unknown_unseen():
    classes = [{"id": "ship", "name": "ship"}]
    with pytest.raises(ConfigError):
        build_bank({"classes": classes, "backgrounds": [], "unseen": ["plane"]})


def test_build_bank_rejects_background_name_collision():
    classes = [{"id": "water_c", "name": "water"}]
    with pytest.raises(ConfigError):
        build_bank({"classes": classes, "backgrounds": ["water"], "unseen": []})


def test_bank_round_trip(tmp_path):
    bank = small_bank(unseen=["tank"])
    path = tmp_path / "bank.json"
    save_bank(bank, path)
    again = load_bank(path)
    assert bank_to_dict(again) == bank_to_dict(bank)
    assert again.unseen == ["tank"]


def test_bank_round_trip_bytes_stable(tmp_path):
    bank = small_bank()
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    save_bank(bank, p1)
    save_bank(load_bank(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_packaged_bank_iSAID_shape():
    bank = load_packaged_bank("isaid")
    assert len(bank.classes) == 15
    assert len(bank.unseen) == 4
    names = {c.name for c in bank.classes}
    assert "ground track field" in names
    assert "small vehicle" in names
    assert len(bank.backgrounds) >= 1


def test_packaged_bank_referring_shape():
    bank = load_packaged_bank("rrsisd")
    assert len(bank.classes) == 20
    assert len(bank.unseen) == 5
    names = {c.name for c in bank.classes}
    assert "golf field" in names


def test_packaged_bank_unknown_name():
    with pytest.raises(ConfigError):
        load_packaged_bank("nope")


def test_vocabulary_includes_synonyms():
    bank = small_bank()
    vocab = bank.vocabulary()
    assert vocab.match(("boat",)) == "ship"
    assert vocab.match(("storage", "tank")) == "tank"


def test_class_entry_defaults():
    e = ClassEntry(class_id="x", name="thing")
    assert e.synonyms == []
    assert e.description is None
    assert e.verbatim is True
