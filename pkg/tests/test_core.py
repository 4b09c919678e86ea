import pytest
from hypothesis import given
from hypothesis import strategies as st

from critpick.core import (
    OVERALL,
    Condition,
    Criterion,
    Difficulty,
    ImageRef,
    PreferenceLabel,
    Prompt,
    Sample,
    difficulty_of,
    instance_for,
    label_to_target,
)


def make_sample(**overrides):
    prompt = Prompt(
        id="p1",
        text="a lighthouse at dusk",
        components=frozenset({"core_subjects", "scene_environment"}),
        topic="nature",
    )
    c1 = Criterion(id="c1", text="subject fidelity", theme="semantic_alignment")
    c2 = Criterion(id="c2", text="lighting mood", theme="lighting_color")
    fields = dict(
        id="s1",
        prompt=prompt,
        image_a=ImageRef(id="i1", source_model="m1", features=(0.1, 0.2)),
        image_b=ImageRef(id="i2", source_model="m2", features=(0.3, 0.4)),
        criteria=(c1, c2),
        criterion_labels={"c1": PreferenceLabel.A_WINS, "c2": PreferenceLabel.TIE},
        overall_label=PreferenceLabel.A_WINS,
    )
    fields.update(overrides)
    return Sample(**fields)


class TestDifficultyOf:
    @pytest.mark.parametrize(
        "count,expected",
        [
            (1, Difficulty.EASY),
            (2, Difficulty.EASY),
            (3, Difficulty.MEDIUM),
            (4, Difficulty.MEDIUM),
            (5, Difficulty.HARD),
            (6, Difficulty.HARD),
        ],
    )
    def test_bands(self, count, expected):
        assert difficulty_of(count) is expected

    @pytest.mark.parametrize("count", [0, 7, -1])
    def test_out_of_range(self, count):
        with pytest.raises(ValueError):
            difficulty_of(count)

    def test_monotone(self):
        order = [Difficulty.EASY, Difficulty.MEDIUM, Difficulty.HARD]
        ranks = [order.index(difficulty_of(k)) for k in range(1, 7)]
        assert ranks == sorted(ranks)


class TestLabelToTarget:
    def test_values(self):
        assert label_to_target(PreferenceLabel.A_WINS) == 1.0
        assert label_to_target(PreferenceLabel.B_WINS) == 0.0
        assert label_to_target(PreferenceLabel.TIE) == 0.5

    def test_bijection(self):
        targets = {label_to_target(label) for label in PreferenceLabel}
        assert targets == {0.0, 0.5, 1.0}

    def test_swapped_flips_target(self):
        for label in PreferenceLabel:
            assert label_to_target(label.swapped()) == 1.0 - label_to_target(label)


class TestPrompt:
    def test_rejects_empty_text(self):
        with pytest.raises(ValueError):
            Prompt(id="p", text="", components=frozenset({"core_subjects"}))

    def test_rejects_unknown_component(self):
        with pytest.raises(ValueError, match="unknown prompt components"):
            Prompt(id="p", text="x", components=frozenset({"bogus"}))

    def test_rejects_empty_components(self):
        with pytest.raises(ValueError):
            Prompt(id="p", text="x", components=frozenset())


class TestImageRef:
    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="non-finite"):
            ImageRef(id="i", source_model="m", features=(1.0, float("nan")))

    def test_rejects_empty_features(self):
        with pytest.raises(ValueError):
            ImageRef(id="i", source_model="m", features=())


class TestCriterion:
    def test_overall_sentinel(self):
        assert OVERALL.id == "overall"
        assert OVERALL.is_overall

    def test_rejects_unknown_theme(self):
        with pytest.raises(ValueError):
            Criterion(id="c", text="x", theme="vibes")


class TestSample:
    def test_valid(self):
        sample = make_sample()
        assert sample.difficulty is Difficulty.EASY

    def test_rejects_same_image_ids(self):
        with pytest.raises(ValueError, match="must differ"):
            make_sample(
                image_b=ImageRef(id="i1", source_model="m", features=(0.0, 0.0))
            )

    def test_rejects_stray_label(self):
        with pytest.raises(ValueError, match="unknown criteria"):
            make_sample(criterion_labels={"missing": PreferenceLabel.TIE})

    def test_rejects_reserved_criterion_id(self):
        with pytest.raises(ValueError, match="reserved"):
            make_sample(criteria=(Criterion(id="overall", text="x"),),
                        criterion_labels={})

    def test_rejects_too_many_criteria(self):
        criteria = tuple(Criterion(id=f"c{i}", text="t") for i in range(6))
        with pytest.raises(ValueError, match="1..5"):
            make_sample(criteria=criteria, criterion_labels={})

    def test_difficulty_tracks_components(self):
        sample = make_sample(
            prompt=Prompt(
                id="p2",
                text="dense prompt",
                components=frozenset(
                    {
                        "core_subjects",
                        "visual_appearance",
                        "scene_environment",
                        "motion_spatial",
                        "artistic_format",
                    }
                ),
            )
        )
        assert sample.difficulty is Difficulty.HARD


class TestCondition:
    def test_single_requires_one(self):
        with pytest.raises(ValueError):
            Condition.multi([Criterion(id="c1", text="x")])

    def test_label_resolution(self):
        sample = make_sample()
        c1 = sample.criteria[0]
        assert sample.label_for(Condition.single(c1)) is PreferenceLabel.A_WINS
        assert sample.label_for(Condition.overall()) is PreferenceLabel.A_WINS
        multi = Condition.multi(sample.criteria)
        assert sample.label_for(multi) is PreferenceLabel.A_WINS  # A beats one tie

    def test_unknown_criterion_raises(self):
        sample = make_sample()
        with pytest.raises(KeyError):
            sample.label_for(Condition.single(Criterion(id="nope", text="x")))

    def test_instance_for_checks_membership(self):
        sample = make_sample()
        instance = instance_for(sample, Condition.overall())
        assert instance.gold is PreferenceLabel.A_WINS


@given(st.integers(min_value=1, max_value=6))
def test_difficulty_total_on_domain(count):
    assert difficulty_of(count) in set(Difficulty)
