"""Build a synthetic labeled corpus, round-trip it through the JSONL record
format, and report corpus statistics.

Run: python3 demos/01_dataset_and_stats.py
"""

import io

from critpick.curation import corpus_stats, detect_reversal
from critpick.records import read_samples, write_samples
from critpick.synthetic import profile_pool, random_benchmark

# A small random corpus: every sample is a prompt, an image pair (feature
# vectors standing in for pixels), 1-5 criteria, and three-way labels.
corpus = random_benchmark(200, seed=42)
sample = corpus[0]
print("first sample:")
print("  prompt:", sample.prompt.text)
print("  components:", sorted(sample.prompt.components))
print("  difficulty:", sample.difficulty.value)
print("  criteria:", [c.text for c in sample.criteria])
print("  labels:", {cid: label.value for cid, label in sample.criterion_labels.items()})
print("  overall:", sample.overall_label.value)
print("  criterion-dependent reversal:", detect_reversal(sample))

# Serialize to the canonical one-object-per-line format and parse back.
buffer = io.StringIO()
write_samples(buffer, corpus, meta={"origin": "demo"})
buffer.seek(0)
restored, meta = read_samples(buffer)
assert restored == corpus
print(f"\nround-trip of {len(corpus)} records OK (header meta: {meta})")

# Corpus statistics; the engineered profile pool reproduces the published
# benchmark profile exactly (avg 3.00 criteria, max 5, 79.9% multi).
stats = corpus_stats(profile_pool(seed=5))
print("\nengineered profile pool:")
for name, value in stats.to_dict().items():
    print(f"  {name}: {value}")
