from fractions import Fraction

import pytest

from unfold_align.fixtures import corpus, fixture
from unfold_align.petri import reachable_markings, validate

from oracles import alignment_cost, linearization_cost

# computed once by the independent oracles in tests/oracles.py, then frozen
FROZEN = {
    "example": Fraction(30001, 10000),
    "example_fitting": Fraction(1, 10000),
    "shared_concurrent": Fraction(0),
    "shared_sequential": Fraction(0),
    "mgmt_fitting": Fraction(1, 5000),
    "mgmt_loop": Fraction(1, 5000),
    "mgmt_noisy": Fraction(10001, 5000),
    "seq_fitting": Fraction(0),
    "seq_reversed": Fraction(4),
    "disjoint_alphabet": Fraction(4),
    "dup_fitting": Fraction(0),
    "dup_concurrent": Fraction(0),
    "parallel_as_chain": Fraction(1, 5000),
    "parallel_concurrent": Fraction(1, 5000),
    "parallel_wide": Fraction(5001, 5000),
    "xor_both": Fraction(1),
    "tau_only": Fraction(10001, 10000),
    "single_vs_seq": Fraction(2),
    "loop_twice": Fraction(0),
    "loop_skipped": Fraction(0),
    "loop_broken": Fraction(1),
    "and_xor_concurrent": Fraction(5001, 5000),
    "long_chain_vs_parallel": Fraction(20001, 5000),
    "skip_taken": Fraction(1, 10000),
    "skip_swapped": Fraction(10001, 10000),
}


def test_corpus_is_complete():
    assert sorted(f.name for f in corpus()) == sorted(FROZEN)


@pytest.mark.parametrize("fx", corpus(), ids=lambda f: f.name)
def test_fixture_well_formed(fx):
    assert validate(fx.model) == []
    assert fx.model.m_final in reachable_markings(fx.model)


@pytest.mark.parametrize("fx", corpus(), ids=lambda f: f.name)
def test_oracle_agrees_with_frozen_cost(fx):
    assert alignment_cost(fx.model, fx.trace) == FROZEN[fx.name]


@pytest.mark.parametrize("fx", [f for f in corpus() if f.trace.n <= 6], ids=lambda f: f.name)
def test_two_oracles_agree(fx):
    # any firing sequence of an alignment consumes the log in one linearization
    assert linearization_cost(fx.model, fx.trace) == alignment_cost(fx.model, fx.trace)


def test_unknown_fixture():
    with pytest.raises(KeyError):
        fixture("nope")
