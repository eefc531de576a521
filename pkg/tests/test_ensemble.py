"""Majority voting, per-round seeding, and the ensembling loop."""

from __future__ import annotations

import itertools

import pytest
from hypothesis import given, strategies as st

from atc_icl.corpus import LABELS, Label
from atc_icl.ensemble import (
    EmptyVotes,
    IclConfig,
    PredictionRecord,
    RoundFailed,
    derive_round_seed,
    majority_vote,
    run_ensemble,
)
from atc_icl.errors import ConfigError
from atc_icl.gateway import Gateway, MockChatBackend
from atc_icl.prompting import PromptConfig, PromptMode, render_labels
from atc_icl.selection import SelectionStrategy
from conftest import simple_essay


def brute_force_vote(votes):
    """Independent tally oracle: count each label with a plain loop, then
    apply the documented tie-break order Premise > Claim > Major Claim."""
    best_label = None
    best_key = None
    for label in (Label.MAJOR_CLAIM, Label.CLAIM, Label.PREMISE):
        count = 0
        for vote in votes:
            if vote is label:
                count += 1
        key = (count, label.tie_break_rank)
        if best_key is None or key > best_key:
            best_key = key
            best_label = label
    return best_label


def test_majority_vote_examples():
    assert majority_vote([Label.PREMISE, Label.PREMISE, Label.CLAIM]) is Label.PREMISE
    assert majority_vote([Label.CLAIM, Label.CLAIM, Label.CLAIM]) is Label.CLAIM
    # 2-2-1 tie between Major Claim and Claim resolves to Claim (higher frequency rank).
    assert (
        majority_vote([Label.MAJOR_CLAIM, Label.MAJOR_CLAIM, Label.CLAIM, Label.CLAIM, Label.PREMISE])
        is Label.CLAIM
    )


def test_majority_vote_empty():
    with pytest.raises(EmptyVotes):
        majority_vote([])


def test_majority_vote_exhaustive_oracle_up_to_five():
    cases = 0
    for length in range(1, 6):
        for votes in itertools.product(LABELS, repeat=length):
            assert majority_vote(list(votes)) is brute_force_vote(votes), votes
            cases += 1
    assert cases == 3 + 9 + 27 + 81 + 243  # 363


@given(st.lists(st.sampled_from(LABELS), min_size=1, max_size=9), st.randoms())
def test_majority_vote_permutation_invariant(votes, rng):
    shuffled = list(votes)
    rng.shuffle(shuffled)
    assert majority_vote(votes) is majority_vote(shuffled)


@given(st.sampled_from(LABELS), st.lists(st.sampled_from(LABELS), max_size=4))
def test_majority_vote_strict_majority_dominates(winner, others):
    votes = [winner] * (len(others) + 1) + others
    assert majority_vote(votes) is winner


def prompt_config(mode=PromptMode.ALL_AT_ONCE):
    return PromptConfig(mode=mode)


def test_icl_config_validation():
    with pytest.raises(ConfigError):
        IclConfig(SelectionStrategy.KRN, k=-1, n_rounds=3, prompt=prompt_config(), run_seed=0)
    with pytest.raises(ConfigError):
        IclConfig(SelectionStrategy.KRN, k=3, n_rounds=0, prompt=prompt_config(), run_seed=0)
    with pytest.raises(ConfigError):
        IclConfig(SelectionStrategy.KRN, k=0, n_rounds=1, prompt=prompt_config(), run_seed=0)
    with pytest.raises(ConfigError):
        IclConfig(
            SelectionStrategy.KRN, k=0, n_rounds=3,
            prompt=prompt_config(PromptMode.ONE_BY_ONE), run_seed=0,
        )
    config = IclConfig(SelectionStrategy.KRN, k=5, n_rounds=5, prompt=prompt_config(), run_seed=0)
    assert config.n_neighbors == 10
    assert config.is_standard_grid()
    assert not IclConfig(
        SelectionStrategy.KRN, k=2, n_rounds=5, prompt=prompt_config(), run_seed=0
    ).is_standard_grid()


def test_derive_round_seed_is_stable_and_distinct():
    a = derive_round_seed(7, "essay001", 1, "rank")
    assert a == derive_round_seed(7, "essay001", 1, "rank")
    others = {
        derive_round_seed(7, "essay001", 1, "pick"),
        derive_round_seed(7, "essay001", 2, "rank"),
        derive_round_seed(7, "essay002", 1, "rank"),
        derive_round_seed(8, "essay001", 1, "rank"),
    }
    assert a not in others
    assert len(others) == 4


def make_pool(size=8):
    labels_cycle = [Label.MAJOR_CLAIM, Label.CLAIM, Label.PREMISE, Label.PREMISE]
    return [
        simple_essay(f"pool{i:02d}", f"Pool topic {i}", labels_cycle[: (i % 3) + 2])
        for i in range(size)
    ]


def gold_of(essay):
    return [c.gold_label for c in essay.components]


def echo_gateway(query):
    return Gateway(
        chat_backend=MockChatBackend(responder=lambda request: render_labels(gold_of(query)))
    )


def test_run_ensemble_single_round_identity():
    query = simple_essay("q", "Query topic", [Label.MAJOR_CLAIM, Label.PREMISE])
    config = IclConfig(SelectionStrategy.KNN_LEN, k=2, n_rounds=1, prompt=prompt_config(), run_seed=1)
    record = run_ensemble(query, make_pool(), config, echo_gateway(query))
    assert record.final == record.rounds[0]
    assert record.essay_id == "q"


def test_run_ensemble_gold_echo_all_rounds():
    query = simple_essay("q", "Query topic", [Label.CLAIM, Label.PREMISE, Label.PREMISE])
    config = IclConfig(SelectionStrategy.KRN, k=3, n_rounds=5, prompt=prompt_config(), run_seed=3)
    record = run_ensemble(query, make_pool(), config, echo_gateway(query))
    assert list(record.final) == gold_of(query)
    assert len(record.rounds) == 5
    assert all(len(round_) == query.m for round_ in record.rounds)
    assert len(record.selections) == 5
    assert all(len(s.chosen_ids) == 3 for s in record.selections)


def test_run_ensemble_rounds_vary_demonstrations():
    query = simple_essay("q", "Query topic", [Label.CLAIM])
    config = IclConfig(SelectionStrategy.KRN, k=3, n_rounds=5, prompt=prompt_config(), run_seed=11)
    record = run_ensemble(query, make_pool(), config, echo_gateway(query))
    assert len({s.chosen_ids for s in record.selections}) > 1


def test_run_ensemble_scripted_disagreement_matches_tally_oracle():
    query = simple_essay("q", "Query topic", [Label.CLAIM, Label.PREMISE])
    per_round = [
        [Label.CLAIM, Label.PREMISE],
        [Label.MAJOR_CLAIM, Label.PREMISE],
        [Label.CLAIM, Label.CLAIM],
        [Label.MAJOR_CLAIM, Label.PREMISE],
        [Label.CLAIM, Label.PREMISE],
    ]
    script = [render_labels(labels) for labels in per_round]
    gateway = Gateway(chat_backend=MockChatBackend(script=script))
    config = IclConfig(SelectionStrategy.KNN_LEN, k=2, n_rounds=5, prompt=prompt_config(), run_seed=5)
    record = run_ensemble(query, make_pool(), config, gateway)
    # 3-vs-2 on component 1 (Claim), 4-vs-1 on component 2 (Premise).
    assert record.final == (Label.CLAIM, Label.PREMISE)
    for j in range(query.m):
        assert record.final[j] is brute_force_vote([labels[j] for labels in per_round])
    assert record.vote_counts[0] == {"Claim": 3, "MajorClaim": 2}


def test_run_ensemble_round_failure_aborts_essay():
    query = simple_essay("q", "Query topic", [Label.CLAIM])
    gateway = Gateway(chat_backend=MockChatBackend(responder=lambda request: "nonsense"))
    config = IclConfig(SelectionStrategy.KNN_LEN, k=2, n_rounds=3, prompt=prompt_config(), run_seed=5)
    with pytest.raises(RoundFailed):
        run_ensemble(query, make_pool(), config, gateway)


def test_run_ensemble_reproducible_given_config():
    query = simple_essay("q", "Query topic", [Label.CLAIM, Label.CLAIM])
    config = IclConfig(SelectionStrategy.KRN, k=2, n_rounds=3, prompt=prompt_config(), run_seed=21)
    first = run_ensemble(query, make_pool(), config, echo_gateway(query))
    second = run_ensemble(query, make_pool(), config, echo_gateway(query))
    assert first == second
    assert first.to_dict() == second.to_dict()


def test_run_ensemble_k_zero_skips_selection():
    query = simple_essay("q", "Query topic", [Label.CLAIM, Label.PREMISE])
    gold = gold_of(query)

    def responder(request):
        import re

        j = int(re.search(r"component (\d+) of", request.user_text).group(1))
        return gold[j - 1].display_name

    gateway = Gateway(chat_backend=MockChatBackend(responder=responder))
    config = IclConfig(
        SelectionStrategy.KRN, k=0, n_rounds=1,
        prompt=prompt_config(PromptMode.ONE_BY_ONE), run_seed=0,
    )
    record = run_ensemble(query, [], config, gateway)
    assert list(record.final) == gold
    assert record.selections[0].chosen_ids == ()


def test_prediction_record_dict_round_trip():
    query = simple_essay("q", "Query topic", [Label.CLAIM])
    config = IclConfig(SelectionStrategy.KRN, k=2, n_rounds=3, prompt=prompt_config(), run_seed=13)
    record = run_ensemble(query, make_pool(), config, echo_gateway(query))
    assert PredictionRecord.from_dict(record.to_dict()) == record
