from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import corpus, has_nontrivial_automorphism, isomorphic, parser_oracle
from structgnn.errors import (
    EmptyInput,
    MultiFragment,
    SmilesSyntaxError,
    UnbalancedParen,
    UnclosedRing,
    UnknownElement,
    ValenceError,
)
from structgnn.molparse import (
    BondOrder,
    Chirality,
    canonical_ranks,
    canonical_smiles,
    is_symmetric,
    parse_smiles,
    perceive_rings,
    random_smiles,
)
from structgnn.molparse.elements import implicit_hydrogens

CORPUS = corpus()


# -- parsing ------------------------------------------------------------------


def test_methane():
    m = parse_smiles("C")
    assert m.n_atoms == 1 and m.n_bonds == 0
    assert m.atoms[0].implicit_h == 4


def test_benzene_atoms_and_bonds():
    m = parse_smiles("c1ccccc1")
    assert m.n_atoms == 6 and m.n_bonds == 6
    assert all(a.aromatic and a.total_h == 1 for a in m.atoms)
    assert all(b.order is BondOrder.AROMATIC for b in m.bonds)


def test_acetic_acid():
    m = parse_smiles("CC(=O)O")
    assert m.n_atoms == 4
    orders = {(b.begin, b.end): b.order for b in m.bonds}
    assert orders == {(0, 1): BondOrder.SINGLE, (1, 2): BondOrder.DOUBLE, (1, 3): BondOrder.SINGLE}
    assert m.atoms[3].implicit_h == 1
    assert m.atoms[2].implicit_h == 0


@pytest.mark.parametrize(
    "smiles, error",
    [
        ("C1CC", UnclosedRing),
        ("CC(C", UnbalancedParen),
        ("CC)C", UnbalancedParen),
        ("C[Xe]", UnknownElement),
        ("*C", UnknownElement),
        ("CC.O", MultiFragment),
        ("", EmptyInput),
        ("   ", EmptyInput),
        ("C(=O)(=O)=O", ValenceError),
        ("[CH5]", ValenceError),
        ("C==C", SmilesSyntaxError),
        ("CcC", SmilesSyntaxError),
    ],
)
def test_parse_errors(smiles, error):
    with pytest.raises(error):
        parse_smiles(smiles)


def test_error_codes_are_machine_readable():
    with pytest.raises(UnclosedRing) as info:
        parse_smiles("C1CC")
    assert info.value.code == "UnclosedRing"
    assert info.value.position is not None


def test_bracket_atoms():
    m = parse_smiles("[NH4+]")
    assert m.atoms[0].formal_charge == 1 and m.atoms[0].total_h == 4
    m = parse_smiles("[13CH3]O")
    assert m.atoms[0].isotope == 13 and m.atoms[0].total_h == 3
    m = parse_smiles("C[O-]")
    assert m.atoms[1].formal_charge == -1 and m.atoms[1].total_h == 0


def test_chirality_tags():
    m = parse_smiles("N[C@@H](C)C(=O)O")
    assert m.atoms[1].chirality is Chirality.CW
    m = parse_smiles("N[C@H](C)C(=O)O")
    assert m.atoms[1].chirality is Chirality.CCW


def test_percent_ring_closure():
    assert canonical_smiles(parse_smiles("C%10CCCCC%10")) == canonical_smiles(parse_smiles("C1CCCCC1"))


def test_heteroaromatic_hydrogens():
    assert [a.total_h for a in parse_smiles("c1cc[nH]c1").atoms] == [1, 1, 1, 1, 1]
    assert [a.total_h for a in parse_smiles("c1ccsc1").atoms] == [1, 1, 1, 0, 1]
    assert [a.total_h for a in parse_smiles("Cn1cccc1").atoms][1] == 0
    assert [a.total_h for a in parse_smiles("c1ccncc1").atoms][3] == 0


def test_biphenyl_link_is_single():
    m = parse_smiles("c1ccccc1-c1ccccc1")
    link = [b for b in m.bonds if not b.in_ring]
    assert len(link) == 1 and link[0].order is BondOrder.SINGLE
    m2 = parse_smiles("c1ccccc1c1ccccc1")
    assert canonical_smiles(m) == canonical_smiles(m2)


def test_implicit_h_rule():
    assert implicit_hydrogens("C", [4, 4], True) == 1
    assert implicit_hydrogens("C", [4, 4, 1], True) == 0
    assert implicit_hydrogens("N", [4, 4], True) == 0
    assert implicit_hydrogens("S", [1, 2, 1], False) == 0
    assert implicit_hydrogens("S", [2, 2], False) == 0


def test_corpus_matches_oracle():
    for entry in parser_oracle():
        m = parse_smiles(entry["smiles"])
        assert m.n_atoms == entry["n_atoms"], entry["smiles"]
        assert m.n_bonds == entry["n_bonds"], entry["smiles"]
        assert [a.total_h for a in m.atoms] == entry["total_h"], entry["smiles"]
        assert [a.formal_charge for a in m.atoms] == entry["charges"], entry["smiles"]


def test_corpus_is_large_and_oracle_covers_it():
    assert len(CORPUS) >= 200
    assert [e["smiles"] for e in parser_oracle()] == CORPUS


def test_graph_invariants_on_corpus():
    for s in CORPUS:
        m = parse_smiles(s)
        pairs = [frozenset((b.begin, b.end)) for b in m.bonds]
        assert len(set(pairs)) == len(pairs)
        for b in m.bonds:
            assert b.begin != b.end
            if b.order is BondOrder.AROMATIC:
                assert m.atoms[b.begin].aromatic and m.atoms[b.end].aromatic
        assert all(a.implicit_h >= 0 for a in m.atoms)


# -- rings ------------------------------------------------------------------


def test_cyclopropane_ring():
    info = perceive_rings(parse_smiles("C1CC1"))
    assert [set(r) for r in info.rings] == [{0, 1, 2}]


def test_naphthalene_rings():
    m = parse_smiles("c1ccc2ccccc2c1")
    info = perceive_rings(m)
    assert len(info.rings) == 2
    assert sorted(len(r) for r in info.rings) == [6, 6]
    assert len(info.ring_systems) == 1 and len(info.ring_systems[0]) == 10


def test_acyclic_has_no_rings():
    info = perceive_rings(parse_smiles("CCCC(C)O"))
    assert info.rings == () or list(info.rings) == []
    assert not any(b.in_ring for b in parse_smiles("CCCC(C)O").bonds)


def test_ring_rank_law_on_corpus():
    for s in CORPUS:
        m = parse_smiles(s)
        assert len(m.ring_info.rings) == m.n_bonds - m.n_atoms + 1, s


def test_ring_systems_partition_ring_atoms():
    for s in CORPUS:
        m = parse_smiles(s)
        info = m.ring_info
        ring_atoms = set().union(*map(set, info.rings)) if info.rings else set()
        system_atoms = [a for sys in info.ring_systems for a in sys]
        assert len(system_atoms) == len(set(system_atoms))
        assert set(system_atoms) == ring_atoms
        for r in info.rings:
            assert sum(1 for sys in info.ring_systems if set(r) <= set(sys)) == 1


def test_in_ring_flag_matches_rings():
    for s in CORPUS:
        m = parse_smiles(s)
        on_ring = set()
        for r in m.ring_info.rings:
            members = set(r)
            for bi, b in enumerate(m.bonds):
                if b.begin in members and b.end in members:
                    on_ring.add(bi)
        # every bond on a ring cycle has in_ring set; chords between ring atoms count too
        for bi, b in enumerate(m.bonds):
            if b.in_ring:
                assert bi in on_ring, s


def test_cubane_rank_law():
    m = parse_smiles("C12C3C4C1C5C2C3C45")
    assert len(m.ring_info.rings) == 5
    assert all(len(r) == 4 for r in m.ring_info.rings)


# -- canonicalization ----------------------------------------------------------


def test_ranks_examples():
    assert len(set(canonical_ranks(parse_smiles("c1ccccc1")))) == 1
    assert len(set(canonical_ranks(parse_smiles("CCO")))) == 3
    assert len(set(canonical_ranks(parse_smiles("CC(C)C")))) == 2


def test_symmetry_examples():
    assert is_symmetric(parse_smiles("c1ccccc1"))
    assert is_symmetric(parse_smiles("CC(C)C"))
    assert not is_symmetric(parse_smiles("CCO"))


def test_canonical_reorder_example():
    assert canonical_smiles(parse_smiles("OCC")) == canonical_smiles(parse_smiles("CCO"))


def test_kekule_and_aromatic_benzene_are_distinct_graphs():
    kek = parse_smiles("C1=CC=CC=C1")
    aro = parse_smiles("c1ccccc1")
    assert not any(a.aromatic for a in kek.atoms)
    assert canonical_smiles(kek) != canonical_smiles(aro)


def test_idempotence_on_corpus():
    for s in CORPUS:
        c = canonical_smiles(parse_smiles(s))
        assert canonical_smiles(parse_smiles(c)) == c, s


def test_round_trip_preserves_graph():
    for s in CORPUS:
        m = parse_smiles(s)
        back = parse_smiles(canonical_smiles(m))
        assert back.n_atoms == m.n_atoms and back.n_bonds == m.n_bonds
        assert back.element_counts() == m.element_counts()
        assert Counter(canonical_ranks(back)) == Counter(canonical_ranks(m))
        if m.n_atoms <= 10:
            assert isomorphic(m, back), s


def test_symmetry_matches_automorphism_oracle():
    checked = 0
    for s in CORPUS:
        m = parse_smiles(s)
        if m.n_atoms <= 10:
            assert is_symmetric(m) == has_nontrivial_automorphism(m), s
            checked += 1
    assert checked >= 50


@settings(max_examples=60, deadline=None)
@given(idx=st.integers(0, len(CORPUS) - 1), seed=st.integers(0, 2**32 - 1))
def test_canonical_invariant_under_reordering(idx, seed):
    m = parse_smiles(CORPUS[idx])
    shuffled = parse_smiles(random_smiles(m, np.random.default_rng(seed)))
    assert canonical_smiles(shuffled) == canonical_smiles(m)
    assert Counter(canonical_ranks(shuffled)) == Counter(canonical_ranks(m))


@settings(max_examples=40, deadline=None)
@given(idx=st.integers(0, len(CORPUS) - 1), seed=st.integers(0, 2**32 - 1))
def test_stereo_survives_reordering(idx, seed):
    m = parse_smiles(CORPUS[idx])
    shuffled = parse_smiles(random_smiles(m, np.random.default_rng(seed)))
    tags = Counter(a.chirality is not Chirality.NONE for a in m.atoms)
    assert Counter(a.chirality is not Chirality.NONE for a in shuffled.atoms) == tags


def test_enantiomers_have_distinct_canonical_forms():
    a = canonical_smiles(parse_smiles("N[C@@H](C)C(=O)O"))
    b = canonical_smiles(parse_smiles("N[C@H](C)C(=O)O"))
    assert a != b
    assert a == canonical_smiles(parse_smiles("C[C@H](N)C(=O)O"))
