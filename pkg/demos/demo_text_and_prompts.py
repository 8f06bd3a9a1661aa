"""Walkthrough: class text banks, prompt rendering, and expression splitting.

Run with:  python3 demos/demo_text_and_prompts.py
"""

from dataclasses import replace

from maskalign.prompts import TEMPLATE_PRESETS, load_packaged_bank, render_prompts
from maskalign.text import decouple_expression

# ---------------------------------------------------------------
# 1. the packaged aerial-imagery bank: classes, synonyms, backgrounds
# ---------------------------------------------------------------
bank = load_packaged_bank("isaid")
print("classes:", len(bank.classes), "| backgrounds:", bank.backgrounds)
print("held-out class names:", bank.unseen)
ship = next(c for c in bank.classes if c.class_id == "ship")
print("the ship entry carries synonyms:", ship.synonyms)

# ---------------------------------------------------------------
# 2. prompts are the text side of the matching problem
# ---------------------------------------------------------------
prompts = render_prompts(bank)
print("\nrendered", len(prompts), "prompts; a few of them:")
for prompt in prompts[:3]:
    print(f"  [{prompt.class_id}] {prompt.text!r} ({prompt.kind})")
background = [p for p in prompts if p.kind == "background"][0]
print(f"  [{background.class_id}] {background.text!r} ({background.kind})")

# the identity preset drops the aerial-view phrasing entirely
plain = render_prompts(replace(bank, template=TEMPLATE_PRESETS["identity"]))
print("same class, two templates:")
print("  topview: ", prompts[0].text)
print("  identity:", plain[0].text)

# ---------------------------------------------------------------
# 3. referring expressions split into class words and modifier words
# ---------------------------------------------------------------
# heads that are not bank classes (vehicle, building) still become the
# class tokens through the noun-phrase fallback; matched class stays None
vocab = bank.vocabulary()
for text in (
    "A red vehicle",
    "An oval ground track field",
    "the small building on the left with a red roof",
    "two ships moored near the dock",
):
    parts = decouple_expression(text, vocab)
    print(f"\n{text!r}")
    print("  class tokens:   ", [t.text for t in parts.cls_tokens])
    print("  modifier tokens:", [t.text for t in parts.mod_tokens])
    print("  matched class:  ", parts.matched_class_id)
