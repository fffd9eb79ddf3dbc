from __future__ import annotations

import math
import random
import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chemsandbox.descriptors import (
    ALGORITHM_ID,
    Fingerprint,
    atom_logp_contributions,
    hbond_acceptors,
    hbond_donors,
    logp,
    morgan_fingerprint,
    murcko_scaffold,
    parse_typing_rules,
    property_vector,
    qed,
    qed_from_properties,
    qed_inputs,
    rotatable_bonds,
    scaffold_similarity,
    tanimoto,
)
from chemsandbox.errors import AlgorithmMismatch, UntypedAtom
from chemsandbox.molgraph import canonical_smiles, graphs_isomorphic, mol_from_smiles
from oracles import corpus, random_rendering

CORPUS = corpus()


# -- fingerprint oracle --------------------------------------------------------


def fnv_bytes(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) % (1 << 64)
    return h


def pack(words) -> bytes:
    return b"".join(struct.pack("<Q", w % (1 << 64)) for w in words)


def oracle_fingerprint_bits(mol, radius=2, width=2048) -> set[int]:
    """Morgan environments re-derived with struct-packed bytes."""
    in_ring = mol.in_ring
    current = [
        fnv_bytes(pack([a.atomic_number, mol.degree(i), a.formal_charge, a.total_h, int(in_ring[i]), int(a.aromatic)]))
        for i, a in enumerate(mol.atoms)
    ]
    hashes = list(current)
    for r in range(1, radius + 1):
        nxt = []
        for i in range(len(mol.atoms)):
            pairs = sorted((int(order), current[j]) for j, order in mol.neighbors[i])
            words = [r, current[i]] + [x for pair in pairs for x in pair]
            nxt.append(fnv_bytes(pack(words)))
        current = nxt
        hashes += current
    return {h % width for h in hashes}


@pytest.mark.parametrize("idx", range(0, len(CORPUS), 5))
def test_fingerprint_matches_byte_level_oracle(idx):
    mol = CORPUS[idx]
    assert set(morgan_fingerprint(mol).on_bits()) == oracle_fingerprint_bits(mol)


def test_fingerprint_examples():
    assert morgan_fingerprint(mol_from_smiles("CCO")) == morgan_fingerprint(mol_from_smiles("OCC"))
    assert morgan_fingerprint(mol_from_smiles("CCO")) != morgan_fingerprint(mol_from_smiles("CCN"))
    fp = morgan_fingerprint(mol_from_smiles("C"))
    assert fp.popcount >= 1
    assert (fp.width, fp.radius, fp.algorithm_id) == (2048, 2, ALGORITHM_ID)


def test_tanimoto_examples():
    x = morgan_fingerprint(mol_from_smiles("c1ccccc1O"))
    assert tanimoto(x, x) == 1.0
    assert tanimoto(Fingerprint.from_indices([1, 2]), Fingerprint.from_indices([3, 4])) == 0.0
    assert tanimoto(Fingerprint.from_indices([1, 2, 3]), Fingerprint.from_indices([2, 3, 4])) == 0.5
    assert tanimoto(Fingerprint(0), Fingerprint(0)) == 1.0


def test_tanimoto_rejects_mixed_algorithms():
    a = Fingerprint.from_indices([1])
    with pytest.raises(AlgorithmMismatch):
        tanimoto(a, Fingerprint.from_indices([1], algorithm_id="other-v0"))
    with pytest.raises(AlgorithmMismatch):
        tanimoto(a, Fingerprint.from_indices([1], width=1024))


bitsets = st.sets(st.integers(0, 2047), max_size=64)


@given(bitsets, bitsets)
def test_tanimoto_properties(a, b):
    fa, fb = Fingerprint.from_indices(a), Fingerprint.from_indices(b)
    t = tanimoto(fa, fb)
    assert t == tanimoto(fb, fa)
    assert 0.0 <= t <= 1.0
    assert t >= len(a & b) / 2048
    assert tanimoto(fa, fa) == 1.0


@settings(max_examples=80, deadline=None)
@given(st.integers(0, len(CORPUS) - 1), st.randoms(use_true_random=False))
def test_descriptors_invariant_under_rerendering(idx, rnd):
    mol = CORPUS[idx]
    other = mol_from_smiles(random_rendering(mol, rnd))
    assert morgan_fingerprint(other).to_hex() == morgan_fingerprint(mol).to_hex()
    assert property_vector(other) == property_vector(mol)
    assert canonical_smiles(murcko_scaffold(other)) == canonical_smiles(murcko_scaffold(mol))


# -- scaffolds -------------------------------------------------------------------------


@pytest.mark.parametrize(
    "smiles, scaffold",
    [
        ("CCc1ccccc1", "c1ccccc1"),
        ("CCO", ""),
        ("CC(=O)c1ccccc1", "O=Cc1ccccc1"),
        ("c1ccccc1CCc1ccccc1", "c1ccc(cc1)CCc1ccccc1"),
        ("CC(C)Cc1ccc(cc1)C(C)C(=O)O", "O=CCc1ccccc1"),
    ],
)
def test_scaffold_examples(smiles, scaffold):
    got = murcko_scaffold(mol_from_smiles(smiles))
    assert canonical_smiles(got) == (canonical_smiles(mol_from_smiles(scaffold)) if scaffold else "")


def test_scaffold_idempotent_on_corpus():
    for mol in CORPUS:
        s = murcko_scaffold(mol)
        ss = murcko_scaffold(s)
        if len(s.atoms) <= 24:
            assert graphs_isomorphic(s, ss)
        assert canonical_smiles(s) == canonical_smiles(ss)


def test_scaffold_similarity_conventions():
    benzene, hexane, pyridine = (mol_from_smiles(s) for s in ("c1ccccc1", "CCCCCC", "c1ccncc1"))
    assert scaffold_similarity(hexane, mol_from_smiles("CCO")) == 1.0
    assert scaffold_similarity(hexane, benzene) == 0.0
    assert scaffold_similarity(mol_from_smiles("CCc1ccccc1"), benzene) == 1.0
    assert 0.0 <= scaffold_similarity(benzene, pyridine) < 1.0


# -- logP --------------------------------------------------------------------------------


def test_logp_orders_hexane_above_ethanol():
    assert logp(mol_from_smiles("CCCCCC")) > logp(mol_from_smiles("CCO"))


@pytest.mark.parametrize("idx", range(0, len(CORPUS), 9))
def test_logp_additive_over_copies(idx):
    mol = CORPUS[idx]
    text = canonical_smiles(mol)
    assert logp(mol_from_smiles(f"{text}.{text}")) == 2 * logp(mol)


def test_every_corpus_atom_is_typed():
    for mol in CORPUS:
        assert len(atom_logp_contributions(mol)) == len(mol.atoms)


def test_untyped_atom_reports_index():
    rules = parse_typing_rules("1\t[#6]\t0.1\n")
    with pytest.raises(UntypedAtom) as info:
        atom_logp_contributions(mol_from_smiles("CCO"), rules=rules)
    assert info.value.details.get("atom") == 2


# -- QED and counts --------------------------------------------------------------------------


def test_qed_in_range_on_corpus():
    for mol in CORPUS:
        assert 0.0 < qed(mol) <= 1.0


def test_qed_prefers_300_over_900_dalton():
    base = qed_inputs(mol_from_smiles("CC(=O)Nc1ccc(O)cc1"))
    light, heavy = dict(base, MW=300.0), dict(base, MW=900.0)
    assert qed_from_properties(heavy) < qed_from_properties(light)


def test_qed_tails_decrease():
    base = qed_inputs(mol_from_smiles("CC(=O)Nc1ccc(O)cc1"))
    for key, far in (("MW", 2000.0), ("ALOGP", 12.0), ("PSA", 400.0), ("ROTB", 30), ("ALERTS", 8)):
        assert qed_from_properties(dict(base, **{key: far})) < qed_from_properties(base)


@pytest.mark.parametrize(
    "smiles, field, expected",
    [
        ("O", "hbd", 1),
        ("O", "hba", 1),
        ("c1ccccc1", "rotatable_bonds", 0),
        ("c1ccccc1", "aromatic_rings", 1),
        ("CCCC", "rotatable_bonds", 1),
        ("CC(=O)NC", "rotatable_bonds", 0),
        ("c1ccc2ccccc2c1", "aromatic_rings", 2),
        ("C1CCCCC1", "aromatic_rings", 0),
    ],
)
def test_property_vector_examples(smiles, field, expected):
    assert getattr(property_vector(mol_from_smiles(smiles)), field) == expected


def test_property_vector_consistent_with_individual_functions():
    for mol in CORPUS[::11]:
        pv = property_vector(mol)
        assert pv.hbd == hbond_donors(mol) and pv.hba == hbond_acceptors(mol)
        assert pv.rotatable_bonds == rotatable_bonds(mol)
        assert pv.logp == logp(mol) and pv.qed == qed(mol)
        assert math.isfinite(pv.psa) and pv.psa >= 0


def test_descriptors_equal_on_isomorphic_inputs():
    rng = random.Random(5)
    small = [m for m in CORPUS if len(m.atoms) <= 20]
    for mol in rng.sample(small, 30):
        other = mol_from_smiles(random_rendering(mol, rng))
        assert graphs_isomorphic(mol, other)
        assert property_vector(mol) == property_vector(other)
