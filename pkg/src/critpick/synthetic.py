"""Synthetic corpora: benchmarks, curation pools, and training fixtures.

Everything here is deterministic under a seed and exists so the numeric
machinery can be exercised end to end without any real images: feature
vectors stand in for pixels and labels are drawn (or engineered) directly.
"""

from __future__ import annotations

from critpick.core import (
    Condition,
    Criterion,
    ImageRef,
    PreferenceLabel,
    Prompt,
    Sample,
)
from critpick.curation import PoolEntry, detect_reversal
from critpick.scorers import ScoreRequest
from critpick.seeding import substream

_COMPONENTS = (
    "core_subjects",
    "visual_appearance",
    "scene_environment",
    "motion_spatial",
    "artistic_format",
    "rendering_specs",
)

_THEMES = (
    "semantic_alignment",
    "attribute_fidelity",
    "composition_spatial",
    "lighting_color",
    "structure_anatomy",
    "style_aesthetics",
)

_TOPICS = (
    "people", "animals", "nature", "urban", "lifestyle", "fantasy",
    "food", "vehicles", "architecture", "objects", "sports", "art",
    "technology",
)

_SOURCE_MODELS = tuple(f"generator-{i:02d}" for i in range(14))

_LABELS = (PreferenceLabel.A_WINS, PreferenceLabel.B_WINS, PreferenceLabel.TIE)

_WORDS = (
    "a", "weathered", "lighthouse", "on", "cliff", "at", "dusk", "with",
    "storm", "clouds", "gathering", "overhead", "watercolor", "style",
    "soft", "rim", "lighting", "two", "cats", "playing", "chess", "in",
    "library", "golden", "hour", "photograph", "shallow", "depth", "of",
    "field", "neon", "market", "street", "rain", "reflections",
)


def _prompt_text(rng, n_words: int) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(n_words))


def _make_sample(
    index: int,
    n_components: int,
    n_criteria: int,
    rng,
    d_img: int,
    labels: dict[str, PreferenceLabel] | None = None,
    overall: PreferenceLabel | None = None,
) -> Sample:
    sid = f"s{index:05d}"
    prompt = Prompt(
        id=f"p{index:05d}",
        text=_prompt_text(rng, int(rng.integers(6, 18))),
        components=frozenset(rng.choice(_COMPONENTS, size=n_components, replace=False)),
        topic=str(rng.choice(_TOPICS)),
    )
    models = rng.choice(_SOURCE_MODELS, size=2, replace=False)
    image_a = ImageRef(
        id=f"{sid}-a",
        source_model=str(models[0]),
        features=tuple(rng.normal(size=d_img)),
    )
    image_b = ImageRef(
        id=f"{sid}-b",
        source_model=str(models[1]),
        features=tuple(rng.normal(size=d_img)),
    )
    criteria = tuple(
        Criterion(
            id=f"{sid}-c{k}",
            text=f"criterion {k} {rng.choice(_WORDS)} quality",
            theme=str(rng.choice(_THEMES)),
        )
        for k in range(n_criteria)
    )
    if labels is None:
        labels = {c.id: _LABELS[rng.integers(3)] for c in criteria}
    if overall is None:
        overall = _LABELS[rng.integers(3)]
    return Sample(
        id=sid,
        prompt=prompt,
        image_a=image_a,
        image_b=image_b,
        criteria=criteria,
        criterion_labels=labels,
        overall_label=overall,
    )


def random_benchmark(n: int, seed: int = 0, d_img: int = 8) -> list[Sample]:
    """Fully labeled random samples; every label value occurs for n >= 30."""
    rng = substream(seed, "synthetic/random-benchmark")
    samples = []
    for i in range(n):
        n_components = int(rng.integers(1, 7))
        n_criteria = int(rng.integers(1, 6))
        samples.append(_make_sample(i, n_components, n_criteria, rng, d_img))
    return samples


#: Criterion-count composition matching the published benchmark profile:
#: average 3.00 criteria per sample, maximum 5, 79.9% multi-criterion.
_PROFILE_COUNTS_PER_DIFFICULTY = {1: 201, 2: 300, 3: 97, 4: 102, 5: 300}

_COMPONENTS_FOR_DIFFICULTY = {"easy": (1, 2), "medium": (3, 4), "hard": (5, 6)}


def profile_pool(seed: int = 0, d_img: int = 8) -> list[Sample]:
    """3000 samples hitting the published profile exactly.

    Per difficulty (1000 each): 201 single-criterion samples and
    300/97/102/300 samples with 2/3/4/5 criteria, giving exactly
    avg 3.00 criteria, max 5, multi share 0.799, and a 1/3 difficulty
    ratio.
    """
    rng = substream(seed, "synthetic/profile-pool")
    samples = []
    index = 0
    for band in ("easy", "medium", "hard"):
        lo, hi = _COMPONENTS_FOR_DIFFICULTY[band]
        for n_criteria, count in _PROFILE_COUNTS_PER_DIFFICULTY.items():
            for _ in range(count):
                n_components = lo if index % 2 == 0 else hi
                samples.append(_make_sample(index, n_components, n_criteria, rng, d_img))
                index += 1
    return samples


def curation_pool(
    seed: int = 0,
    per_difficulty: int = 100,
    reversal_count: int = 40,
    ambiguous_count: int = 10,
    threshold: float = 0.8,
    d_img: int = 8,
) -> list[PoolEntry]:
    """Balanced pool with engineered reversal / ambiguous composition.

    Each difficulty band contributes `per_difficulty` entries:
    `reversal_count` with criterion-dependent reversals, `ambiguous_count`
    whose weakest agreement sits just above `threshold`, and the rest
    plain with high agreement.
    """
    if reversal_count + ambiguous_count > per_difficulty:
        raise ValueError("reversal and ambiguous counts exceed the band size")
    rng = substream(seed, "synthetic/curation-pool")
    entries = []
    index = 0
    for band in ("easy", "medium", "hard"):
        lo, hi = _COMPONENTS_FOR_DIFFICULTY[band]
        for j in range(per_difficulty):
            n_components = lo if j % 2 == 0 else hi
            reversal = j < reversal_count
            ambiguous = reversal_count <= j < reversal_count + ambiguous_count
            n_criteria = int(rng.integers(2, 6)) if reversal else int(rng.integers(1, 6))
            sample = _make_sample(index, n_components, n_criteria, rng, d_img)
            if reversal:
                labels = dict(sample.criterion_labels)
                ids = [c.id for c in sample.criteria]
                labels[ids[0]] = PreferenceLabel.A_WINS
                labels[ids[1]] = PreferenceLabel.B_WINS
                sample = _relabel(sample, labels)
            elif detect_reversal(sample):
                # Plain/ambiguous entries must not accidentally carry a
                # reversal; flatten the criterion labels to one side.
                sample = _relabel(
                    sample, {c.id: PreferenceLabel.A_WINS for c in sample.criteria}
                )
            if ambiguous:
                weakest = threshold + 0.05
            else:
                weakest = min(threshold + 0.15, 0.99)
            agreement = {"overall": round(weakest + 0.01, 4)}
            for c in sample.criteria:
                agreement[c.id] = round(min(weakest + 0.02, 1.0), 4)
            agreement[sample.criteria[0].id] = round(weakest, 4)
            entries.append(PoolEntry(sample=sample, agreement=agreement))
            index += 1
    return entries


def _relabel(sample: Sample, labels: dict[str, PreferenceLabel]) -> Sample:
    return Sample(
        id=sample.id,
        prompt=sample.prompt,
        image_a=sample.image_a,
        image_b=sample.image_b,
        criteria=sample.criteria,
        criterion_labels=labels,
        overall_label=sample.overall_label,
    )


def separable_fixture(
    n_pairs: int = 200, d_img: int = 8, seed: int = 0, noise: float = 0.1
) -> tuple[list[Sample], list[tuple[ScoreRequest, PreferenceLabel]]]:
    """Linearly separable training set: a fixed direction decides every pair.

    The first half of the pairs has image_a - image_b equal to +v and is
    labeled A-wins; the second half has -v and is labeled B-wins. The
    shared base features carry small noise so the symmetric block varies
    without affecting separability.
    """
    rng = substream(seed, "synthetic/separable")
    v = rng.normal(size=d_img)
    v *= 1.5 / max(1e-12, float((v @ v) ** 0.5))
    samples = []
    dataset = []
    for i in range(n_pairs):
        a_wins = i < n_pairs // 2
        base = rng.normal(scale=noise, size=d_img)
        delta = v if a_wins else -v
        label = PreferenceLabel.A_WINS if a_wins else PreferenceLabel.B_WINS
        prompt = Prompt(
            id=f"sep-p{i:04d}",
            text=f"separable fixture pair {i:04d} {_prompt_text(rng, 4)}",
            components=frozenset({"core_subjects", "rendering_specs"}),
            topic="fixture",
        )
        criterion = Criterion(
            id=f"sep-c{i:04d}", text="dominant direction alignment",
            theme="attribute_fidelity",
        )
        image_a = ImageRef(
            id=f"sep-{i:04d}-a", source_model="fixture-a",
            features=tuple(base + delta / 2),
        )
        image_b = ImageRef(
            id=f"sep-{i:04d}-b", source_model="fixture-b",
            features=tuple(base - delta / 2),
        )
        sample = Sample(
            id=f"sep-{i:04d}",
            prompt=prompt,
            image_a=image_a,
            image_b=image_b,
            criteria=(criterion,),
            criterion_labels={criterion.id: label},
            overall_label=label,
        )
        samples.append(sample)
        dataset.append(
            (
                ScoreRequest(
                    prompt=prompt, image_a=image_a, image_b=image_b,
                    condition=Condition.overall(),
                ),
                label,
            )
        )
    return samples, dataset


def tie_only_fixture(
    n_pairs: int = 20, d_img: int = 8, seed: int = 1
) -> list[tuple[ScoreRequest, PreferenceLabel]]:
    """Training pairs all labeled tie; a zero scorer is already stationary."""
    rng = substream(seed, "synthetic/tie-only")
    dataset = []
    for i in range(n_pairs):
        prompt = Prompt(
            id=f"tie-p{i:03d}", text=_prompt_text(rng, 6),
            components=frozenset({"core_subjects"}), topic="fixture",
        )
        image_a = ImageRef(
            id=f"tie-{i:03d}-a", source_model="fixture",
            features=tuple(rng.normal(size=d_img)),
        )
        image_b = ImageRef(
            id=f"tie-{i:03d}-b", source_model="fixture",
            features=tuple(rng.normal(size=d_img)),
        )
        dataset.append(
            (
                ScoreRequest(
                    prompt=prompt, image_a=image_a, image_b=image_b,
                    condition=Condition.overall(),
                ),
                PreferenceLabel.TIE,
            )
        )
    return dataset


def dominance_candidates(
    n_candidates: int = 4, d_img: int = 8, seed: int = 0
) -> tuple[Prompt, list[ImageRef]]:
    """Candidate pool where input order is the intended dominance order."""
    rng = substream(seed, "synthetic/dominance")
    prompt = Prompt(
        id="dom-p0", text=_prompt_text(rng, 10),
        components=frozenset({"core_subjects", "scene_environment", "artistic_format"}),
        topic="fixture",
    )
    candidates = [
        ImageRef(
            id=f"cand-{chr(ord('a') + i)}",
            source_model=f"generator-{i:02d}",
            features=tuple(rng.normal(size=d_img)),
        )
        for i in range(n_candidates)
    ]
    return prompt, candidates
