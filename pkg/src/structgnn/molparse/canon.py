"""Canonical atom ranking, symmetry detection and SMILES writing."""

from __future__ import annotations

from collections import Counter
from collections.abc import Sequence

import numpy as np

from .elements import ATOMIC_NUMBER, ORGANIC_SUBSET
from .graph import BondOrder, Chirality, MolGraph


def _dense(keys: Sequence) -> list[int]:
    lookup = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [lookup[k] for k in keys]


def _refine(mol: MolGraph, ranks: list[int]) -> list[int]:
    """Split rank classes by neighbor (rank, bond order) multisets until stable."""
    n_classes = len(set(ranks))
    while True:
        keys = [
            (ranks[i], tuple(sorted((ranks[w], int(mol.bonds[bi].order)) for w, bi in mol.adjacency[i])))
            for i in range(mol.n_atoms)
        ]
        new = _dense(keys)
        n_new = len(set(new))
        if n_new == n_classes:
            return new
        ranks, n_classes = new, n_new


def _ring_atoms(mol: MolGraph) -> frozenset[int]:
    return mol.ring_info.ring_atoms


def canonical_ranks(mol: MolGraph) -> list[int]:
    """Symmetry classes from iterative refinement, without tie-breaking.

    Atoms sharing a rank cannot be told apart by the refinement; ranks are
    dense integers starting at 0.
    """
    in_ring = _ring_atoms(mol)
    init = [
        (
            ATOMIC_NUMBER[a.element],
            mol.degree(i),
            a.formal_charge,
            a.total_h,
            a.aromatic,
            i in in_ring,
        )
        for i, a in enumerate(mol.atoms)
    ]
    return _refine(mol, _dense(init))


def is_symmetric(mol: MolGraph) -> bool:
    """True when at least two atoms share a canonical rank."""
    return len(set(canonical_ranks(mol))) < mol.n_atoms


def canonical_order(mol: MolGraph) -> list[int]:
    """Fully tie-broken canonical ranks (a permutation of ``range(n_atoms)``).

    Ties are broken by promoting the lowest-indexed atom of the lowest tied
    class and refining again.
    """
    in_ring = _ring_atoms(mol)
    init = [
        (
            ATOMIC_NUMBER[a.element],
            a.isotope or 0,
            mol.degree(i),
            a.formal_charge,
            a.total_h,
            a.aromatic,
            i in in_ring,
            a.bracket,
            a.chirality is not Chirality.NONE,
        )
        for i, a in enumerate(mol.atoms)
    ]
    ranks = _refine(mol, _dense(init))
    while len(set(ranks)) < mol.n_atoms:
        counts = Counter(ranks)
        tied = min(r for r, c in counts.items() if c > 1)
        chosen = min(i for i, r in enumerate(ranks) if r == tied)
        ranks = _refine(mol, _dense([(r, i != chosen) for i, r in enumerate(ranks)]))
    return ranks


def permutation_parity(reference: Sequence[int], permuted: Sequence[int]) -> int:
    """0 for an even permutation between the two orderings, 1 for odd."""
    pos = {v: i for i, v in enumerate(reference)}
    perm = [pos[v] for v in permuted]
    seen = [False] * len(perm)
    parity = 0
    for i in range(len(perm)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


def _flip(tag: Chirality) -> Chirality:
    if tag is Chirality.CW:
        return Chirality.CCW
    if tag is Chirality.CCW:
        return Chirality.CW
    return tag


def canonical_chirality(mol: MolGraph, order: Sequence[int] | None = None) -> list[Chirality]:
    """Chirality tags re-expressed against neighbors sorted by canonical rank.

    The result does not depend on how the input SMILES was written (a bracket
    hydrogen sorts first).
    """
    if order is None:
        order = canonical_order(mol)
    out = []
    for i, atom in enumerate(mol.atoms):
        if atom.chirality is Chirality.NONE or not mol.stereo_order:
            out.append(atom.chirality)
            continue
        written = list(mol.stereo_order[i])
        ref = sorted(written, key=lambda w: -1 if w < 0 else order[w])
        flip = permutation_parity(written, ref)
        out.append(_flip(atom.chirality) if flip else atom.chirality)
    return out


# -- writing ---------------------------------------------------------------


def _atom_token(mol: MolGraph, i: int, chirality: Chirality) -> str:
    a = mol.atoms[i]
    sym = a.element.lower() if a.aromatic else a.element
    if not a.bracket and a.element in ORGANIC_SUBSET:
        return sym
    parts = ["[", str(a.isotope) if a.isotope is not None else "", sym]
    if chirality is Chirality.CCW:
        parts.append("@")
    elif chirality is Chirality.CW:
        parts.append("@@")
    h = a.total_h
    if h == 1:
        parts.append("H")
    elif h > 1:
        parts.append(f"H{h}")
    q = a.formal_charge
    if q:
        sign = "+" if q > 0 else "-"
        parts.append(sign if abs(q) == 1 else f"{sign}{abs(q)}")
    parts.append("]")
    return "".join(parts)


def _bond_token(mol: MolGraph, bi: int) -> str:
    b = mol.bonds[bi]
    if b.order is BondOrder.DOUBLE:
        return "="
    if b.order is BondOrder.TRIPLE:
        return "#"
    if b.order is BondOrder.AROMATIC:
        return ""
    if mol.atoms[b.begin].aromatic and mol.atoms[b.end].aromatic:
        return "-"
    return ""


def _ring_label(d: int) -> str:
    return str(d) if d < 10 else f"%{d:02d}"


def write_smiles(mol: MolGraph, ranks: Sequence[int]) -> str:
    """Write ``mol`` as SMILES, traversing atoms in ``ranks`` order.

    The DFS starts at the atom with the lowest (rank, index) and visits
    neighbors in (rank, index) order. Chirality tags are re-expressed for the
    new neighbor order.
    """
    n = mol.n_atoms
    start = min(range(n), key=lambda i: (ranks[i], i))
    visit = [-1] * n
    children: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    closures: list[list[int]] = [[] for _ in range(n)]
    closure_bonds: set[int] = set()

    # pass 1: spanning tree and ring-closure bonds
    counter = 0
    visit[start] = counter
    counter += 1
    stack = [(start, -1, iter(sorted(mol.adjacency[start], key=lambda t: (ranks[t[0]], t[0]))))]
    while stack:
        v, from_bond, it = stack[-1]
        advanced = False
        for w, bi in it:
            if bi == from_bond:
                continue
            if visit[w] >= 0:
                if bi not in closure_bonds:
                    closure_bonds.add(bi)
                    closures[w].append(bi)
                    closures[v].append(bi)
                continue
            children[v].append((w, bi))
            visit[w] = counter
            counter += 1
            stack.append((w, bi, iter(sorted(mol.adjacency[w], key=lambda t: (ranks[t[0]], t[0])))))
            advanced = True
            break
        if not advanced:
            stack.pop()

    # pass 2: emission in the same pre-order
    out: list[str] = []
    open_digits: dict[int, int] = {}
    free: list[int] = []
    next_digit = 1

    def take_digit() -> int:
        nonlocal next_digit
        if free:
            free.sort()
            return free.pop(0)
        d = next_digit
        next_digit += 1
        return d

    work: list = [("atom", start, -1, -1)]
    while work:
        item = work.pop()
        if item[0] == "text":
            out.append(item[1])
            continue
        _, v, from_bond, parent = item
        if from_bond >= 0:
            out.append(_bond_token(mol, from_bond))

        ring_tokens = []
        ring_partners = []
        closing = sorted(
            (bi for bi in closures[v] if bi in open_digits),
            key=lambda bi: visit[mol.bonds[bi].other(v)],
        )
        opening = sorted(
            (bi for bi in closures[v] if bi not in open_digits),
            key=lambda bi: visit[mol.bonds[bi].other(v)],
        )
        for bi in closing:
            d = open_digits.pop(bi)
            ring_tokens.append(_ring_label(d))
            ring_partners.append(mol.bonds[bi].other(v))
            free.append(d)
        for bi in opening:
            d = take_digit()
            open_digits[bi] = d
            ring_tokens.append(_bond_token(mol, bi) + _ring_label(d))
            ring_partners.append(mol.bonds[bi].other(v))

        atom = mol.atoms[v]
        tag = atom.chirality
        if tag is not Chirality.NONE and mol.stereo_order:
            written = list(mol.stereo_order[v])
            new = [parent] if parent >= 0 else []
            if -1 in written:
                new.append(-1)
            new += ring_partners + [w for w, _ in children[v]]
            if sorted(new) == sorted(written) and permutation_parity(written, new):
                tag = _flip(tag)
        out.append(_atom_token(mol, v, tag))
        out.extend(ring_tokens)

        kids = children[v]
        for k in range(len(kids) - 1, -1, -1):
            w, bi = kids[k]
            if k < len(kids) - 1:
                work.append(("text", ")"))
                work.append(("atom", w, bi, v))
                work.append(("text", "("))
            else:
                work.append(("atom", w, bi, v))
    return "".join(out)


def canonical_smiles(mol: MolGraph) -> str:
    """Deterministic SMILES independent of the input atom order."""
    return write_smiles(mol, canonical_order(mol))


def random_smiles(mol: MolGraph, rng: np.random.Generator) -> str:
    """A valid SMILES for ``mol`` with a random traversal (for invariance tests)."""
    return write_smiles(mol, list(rng.permutation(mol.n_atoms)))
