"""
One document, stage by stage
============================

Walk a single invoice from the bundled schema through every stage:
freeze the random choices, fill in values, lay out, render, annotate.
Output lands in ``demo_out/one`` (or the directory given as argv[1]).
"""
import sys
from pathlib import Path

from docsynth import load_bundled_schema
from docsynth.annotate import build_annotations, export_annotation_json, export_iob
from docsynth.layout import plan_layout
from docsynth.render import draw_debug_overlay, render_document
from docsynth.sampling import RandomSource, freeze_permutation, permutation_fingerprint
from docsynth.text import FontBook, PillowMetrics
from docsynth.values import instantiate_document

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out/one")
out.mkdir(parents=True, exist_ok=True)

schema = load_bundled_schema("invoice")
rng = RandomSource(seed=1234, stream=0)

# %%
# Freezing picks which groups appear, where, as tables or not, and in which fonts.
perm = freeze_permutation(schema, rng.derive("freeze"))
print("fingerprint", permutation_fingerprint(perm)[:16])
for g in perm.groups:
    kind = g.layout.kind
    print(f"  {g.name:16s} section {g.segment}  {kind:8s} {[e.name for e in g.entities]}")

# %%
# Values are generated per entity type; currency symbols stay consistent inside one document.
instance = instantiate_document(perm, schema, rng.derive("values"))
for g in instance.groups[:3]:
    for e in g.entities:
        print(f"  {e.name:24s} {e.values[0]!r}")

# %%
# The grid planner sizes each section's virtual grid to its content.
metrics = PillowMetrics(FontBook.for_common(schema.common))
plan = plan_layout(instance, schema.common.structural, metrics,
                   font_size_bounds=schema.common.font_size)
for name, rect in plan.rects.items():
    print(f"  {name:16s} {rect.as_list()}")

# %%
# Rendering records word boxes from glyph metrics; annotation turns them into the exported records.
image, rendered = render_document(instance, plan, metrics)
annotations = build_annotations(rendered, schema.common.expected_keys)
image.save(out / "invoice.png")
draw_debug_overlay(image, rendered).save(out / "invoice.overlay.png")
(out / "invoice.ann.json").write_text(export_annotation_json(annotations))

tagged = [t for t in export_iob(annotations) if t.tag != "O"][:8]
print(" ".join(f"{t.text}/{t.tag}" for t in tagged))
print("wrote", sorted(p.name for p in out.iterdir()))
