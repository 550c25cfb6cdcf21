"""
How diverse is a batch?
=======================

Mean pairwise cosine similarity over per-document embeddings: lower means
more varied.  A batch where every page is frozen independently is compared
with a batch that reuses one frozen outline and only swaps the values.
"""
import sys
from pathlib import Path

from docsynth import load_bundled_schema
from docsynth.annotate import parse_annotation_json
from docsynth.diversity import LayoutFeatureEmbedder, mpcs
from docsynth.pipeline import GenerationJob, generate_batch

root = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out/diversity")
schema = load_bundled_schema("invoice")
count = 30


def batch_report(name, **kw):
    out = root / name
    manifest = generate_batch(schema, GenerationJob(seed=3, count=count, out_dir=str(out), **kw))
    embedder = LayoutFeatureEmbedder(manifest["expected_keys"], tuple(manifest["canvas"]))
    vectors = [embedder.embed(parse_annotation_json((out / r["files"]["annotation"]).read_text()))
               for r in manifest["records"]]
    return mpcs(vectors, provider=embedder.provider_id)


print("independent outlines:", batch_report("randomized"))
print("one outline, new values:", batch_report("single", instances_per_permutation=count))

# %%
# The same number from the command line:
#   docsynth diversity --input demo_out/diversity/randomized
