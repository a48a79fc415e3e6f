"""SMILES parsing.

Supported subset: organic-subset and bracket atoms (isotope, chirality
``@``/``@@``, hydrogen count, charge, atom class), bonds ``- = # :`` plus
``/`` and ``\\`` read as single bonds, branches, and ring closures ``0-9`` and
``%nn``. Dot-separated fragments, wildcards and reaction SMILES are rejected.

Aromaticity is taken as written; there is no aromatization or kekulization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import (
    EmptyInput,
    MultiFragment,
    SmilesSyntaxError,
    UnbalancedParen,
    UnclosedRing,
    UnknownElement,
    ValenceError,
)
from .elements import (
    AROMATIC_SYMBOLS,
    DEFAULT_VALENCES,
    ORGANIC_SUBSET,
    implicit_hydrogens,
    max_valence,
)
from .graph import Atom, Bond, BondOrder, Chirality, MolGraph, build_adjacency
from .rings import find_rings

_BOND_SYMBOLS = {
    "-": BondOrder.SINGLE,
    "/": BondOrder.SINGLE,
    "\\": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
}


@dataclass
class _AtomSpec:
    element: str
    aromatic: bool
    bracket: bool = False
    charge: int = 0
    hcount: int | None = None
    chirality: Chirality = Chirality.NONE
    isotope: int | None = None


@dataclass
class _RingOpen:
    atom: int
    bond: str | None
    slot: int
    position: int


@dataclass
class _Builder:
    text: str
    atoms: list[_AtomSpec] = field(default_factory=list)
    # (begin, end, order, written explicitly)
    bonds: list[tuple[int, int, BondOrder, bool]] = field(default_factory=list)
    pairs: set[frozenset[int]] = field(default_factory=set)
    order: list[list[int | None]] = field(default_factory=list)

    def add_bond(self, a: int, b: int, symbol: str | None, pos: int) -> None:
        if a == b:
            raise SmilesSyntaxError("ring closure onto the same atom", self.text, pos)
        key = frozenset((a, b))
        if key in self.pairs:
            raise SmilesSyntaxError("duplicate bond", self.text, pos)
        self.pairs.add(key)
        if symbol is None:
            both_arom = self.atoms[a].aromatic and self.atoms[b].aromatic
            order = BondOrder.AROMATIC if both_arom else BondOrder.SINGLE
            self.bonds.append((a, b, order, False))
        else:
            order = _BOND_SYMBOLS[symbol]
            if order is BondOrder.AROMATIC and not (
                self.atoms[a].aromatic and self.atoms[b].aromatic
            ):
                raise SmilesSyntaxError("aromatic bond between non-aromatic atoms", self.text, pos)
            self.bonds.append((a, b, order, True))


def _parse_bracket(text: str, start: int) -> tuple[_AtomSpec, int]:
    """Parse ``[...]`` starting at ``start`` (the ``[``); return spec and end index."""
    end = text.find("]", start)
    if end < 0:
        raise SmilesSyntaxError("unterminated bracket atom", text, start)
    body = text[start + 1 : end]
    i = 0

    digits = ""
    while i < len(body) and body[i].isdigit():
        digits += body[i]
        i += 1
    isotope = int(digits) if digits else None

    if i >= len(body):
        raise SmilesSyntaxError("bracket atom without element", text, start)
    symbol = None
    aromatic = False
    two = body[i : i + 2]
    if len(two) == 2 and two[0].isupper() and two[1].islower() and two in DEFAULT_VALENCES:
        symbol = two
        i += 2
    elif body[i].isupper():
        # An unknown two-letter symbol like "Na" must not be read as "N" + "a".
        if len(two) == 2 and two[1].islower() and two[1] != "H":
            raise UnknownElement(f"unknown element {two!r}", text, start + 1 + i)
        if body[i] not in DEFAULT_VALENCES:
            raise UnknownElement(f"unknown element {body[i]!r}", text, start + 1 + i)
        symbol = body[i]
        i += 1
    elif body[i].islower():
        if len(two) == 2 and two.isalpha() and two.islower() and two[1] not in "@":
            raise UnknownElement(f"unknown aromatic element {two!r}", text, start + 1 + i)
        if body[i] not in AROMATIC_SYMBOLS:
            raise UnknownElement(f"unknown element {body[i]!r}", text, start + 1 + i)
        symbol = AROMATIC_SYMBOLS[body[i]]
        aromatic = True
        i += 1
    elif body[i] == "*":
        raise UnknownElement("wildcard atoms are not supported", text, start + 1 + i)
    else:
        raise SmilesSyntaxError("bad bracket atom", text, start + 1 + i)

    chirality = Chirality.NONE
    if body.startswith("@@", i):
        chirality = Chirality.CW
        i += 2
    elif body.startswith("@", i):
        chirality = Chirality.CCW
        i += 1
    if i < len(body) and body[i] == "@" or (i < len(body) and body[i:i + 2] in ("TH", "AL", "SP", "TB", "OH")):
        raise SmilesSyntaxError("unsupported chirality class", text, start + 1 + i)

    hcount = 0
    if i < len(body) and body[i] == "H":
        i += 1
        hdigits = ""
        while i < len(body) and body[i].isdigit():
            hdigits += body[i]
            i += 1
        hcount = int(hdigits) if hdigits else 1

    charge = 0
    if i < len(body) and body[i] in "+-":
        sign = 1 if body[i] == "+" else -1
        ch = body[i]
        i += 1
        if i < len(body) and body[i].isdigit():
            cdigits = ""
            while i < len(body) and body[i].isdigit():
                cdigits += body[i]
                i += 1
            charge = sign * int(cdigits)
        else:
            charge = sign
            while i < len(body) and body[i] == ch:
                charge += sign
                i += 1

    if i < len(body) and body[i] == ":":
        i += 1
        if i >= len(body) or not body[i:].isdigit():
            raise SmilesSyntaxError("bad atom class", text, start + 1 + i)
        i = len(body)
    if i != len(body):
        raise SmilesSyntaxError("unexpected characters in bracket atom", text, start + 1 + i)

    spec = _AtomSpec(
        element=symbol,
        aromatic=aromatic,
        bracket=True,
        charge=charge,
        hcount=hcount,
        chirality=chirality,
        isotope=isotope,
    )
    return spec, end + 1


def _read_organic(text: str, i: int) -> tuple[_AtomSpec, int]:
    two = text[i : i + 2]
    if two in ("Cl", "Br"):
        return _AtomSpec(element=two, aromatic=False), i + 2
    c = text[i]
    if c in ORGANIC_SUBSET:
        return _AtomSpec(element=c, aromatic=False), i + 1
    if c in AROMATIC_SYMBOLS:
        return _AtomSpec(element=AROMATIC_SYMBOLS[c], aromatic=True), i + 1
    if c == "*":
        raise UnknownElement("wildcard atoms are not supported", text, i)
    if c.isalpha():
        sym = two if len(two) == 2 and two[1].islower() and two[0].isupper() else c
        raise UnknownElement(f"element {sym!r} outside the supported set", text, i)
    raise SmilesSyntaxError(f"unexpected character {c!r}", text, i)


def parse_smiles(text: str) -> MolGraph:
    """Parse a SMILES string into a :class:`MolGraph`.

    Raises a :class:`~structgnn.errors.SmilesError` subclass describing the
    first problem found.
    """
    if text is None:
        raise EmptyInput("empty SMILES")
    text = text.strip()
    if not text:
        raise EmptyInput("empty SMILES")
    if not text.isascii():
        raise SmilesSyntaxError("non-ASCII character", text)

    b = _Builder(text)
    prev: int | None = None
    pending: str | None = None
    pending_pos = 0
    stack: list[tuple[int, int]] = []
    rings: dict[int, _RingOpen] = {}
    i = 0
    n = len(text)

    while i < n:
        c = text[i]
        if c == "(":
            if prev is None:
                raise SmilesSyntaxError("branch before first atom", text, i)
            if pending is not None:
                raise SmilesSyntaxError("bond symbol before branch", text, i)
            stack.append((prev, i))
            i += 1
        elif c == ")":
            if not stack:
                raise UnbalancedParen("unmatched ')'", text, i)
            if pending is not None:
                raise SmilesSyntaxError("dangling bond symbol", text, i)
            prev, _ = stack.pop()
            i += 1
        elif c in _BOND_SYMBOLS:
            if pending is not None:
                raise SmilesSyntaxError("consecutive bond symbols", text, i)
            if prev is None:
                raise SmilesSyntaxError("bond before first atom", text, i)
            pending, pending_pos = c, i
            i += 1
        elif c == ".":
            raise MultiFragment("multi-fragment SMILES not supported", text, i)
        elif c.isdigit() or c == "%":
            if prev is None:
                raise SmilesSyntaxError("ring closure before first atom", text, i)
            if c == "%":
                num = text[i + 1 : i + 3]
                if len(num) != 2 or not num.isdigit():
                    raise SmilesSyntaxError("bad %nn ring closure", text, i)
                digit, width = int(num), 3
            else:
                digit, width = int(c), 1
            if digit in rings:
                ro = rings.pop(digit)
                sym = pending
                if ro.bond is not None and pending is not None and ro.bond != pending:
                    if _BOND_SYMBOLS[ro.bond] != _BOND_SYMBOLS[pending]:
                        raise SmilesSyntaxError("conflicting ring-closure bonds", text, i)
                if sym is None:
                    sym = ro.bond
                b.add_bond(ro.atom, prev, sym, i)
                b.order[ro.atom][ro.slot] = prev
                b.order[prev].append(ro.atom)
            else:
                b.order[prev].append(None)
                rings[digit] = _RingOpen(prev, pending, len(b.order[prev]) - 1, i)
            pending = None
            i += width
        else:
            if c == "[":
                spec, j = _parse_bracket(text, i)
            else:
                spec, j = _read_organic(text, i)
            idx = len(b.atoms)
            b.atoms.append(spec)
            b.order.append([])
            if prev is not None:
                b.add_bond(prev, idx, pending, pending_pos if pending else i)
                b.order[idx].append(prev)
                b.order[prev].append(idx)
            if spec.bracket and spec.hcount:
                b.order[idx].append(-1)
            pending = None
            prev = idx
            i = j

    if stack:
        raise UnbalancedParen("unclosed '('", text, stack[-1][1])
    if rings:
        first = min(rings.values(), key=lambda r: r.position)
        raise UnclosedRing("unclosed ring bond", text, first.position)
    if pending is not None:
        raise SmilesSyntaxError("dangling bond symbol", text, pending_pos)
    if not b.atoms:
        raise EmptyInput("no atoms", text)

    return _finish(b)


def _finish(b: _Builder) -> MolGraph:
    n_atoms = len(b.atoms)
    bonds = [Bond(x, y, order) for x, y, order, _ in b.bonds]
    adj = build_adjacency(n_atoms, bonds)
    rings = find_rings(n_atoms, bonds, adj)
    ring_bond_set = {bi for rb in rings.ring_bonds for bi in rb}

    final_bonds = []
    for bi, (x, y, order, explicit) in enumerate(b.bonds):
        in_ring = bi in ring_bond_set
        if order is BondOrder.AROMATIC and not in_ring and not explicit:
            order = BondOrder.SINGLE
        final_bonds.append(Bond(x, y, order, in_ring))
    adj = build_adjacency(n_atoms, final_bonds)

    atoms = []
    for ai, spec in enumerate(b.atoms):
        orders = [int(final_bonds[bi].order) for _, bi in adj[ai]]
        if spec.aromatic and not any(o == BondOrder.AROMATIC for o in orders):
            raise SmilesSyntaxError(f"aromatic atom {ai} is not in an aromatic ring", b.text)
        if spec.bracket:
            used = sum(o if o != 4 else 1 for o in orders) + (spec.hcount or 0)
            if used > max_valence(spec.element, spec.charge):
                raise ValenceError(f"atom {ai} ({spec.element}) exceeds its valence", b.text)
            atoms.append(
                Atom(
                    element=spec.element,
                    formal_charge=spec.charge,
                    explicit_h=spec.hcount or 0,
                    implicit_h=0,
                    aromatic=spec.aromatic,
                    chirality=spec.chirality,
                    isotope=spec.isotope,
                    bracket=True,
                )
            )
        else:
            h = implicit_hydrogens(spec.element, orders, spec.aromatic)
            if h is None:
                raise ValenceError(f"atom {ai} ({spec.element}) exceeds its valence", b.text)
            atoms.append(Atom(element=spec.element, implicit_h=h, aromatic=spec.aromatic))

    return MolGraph(
        atoms=tuple(atoms),
        bonds=tuple(final_bonds),
        adjacency=adj,
        ring_info=rings,
        stereo_order=tuple(tuple(o) for o in b.order),
    )
