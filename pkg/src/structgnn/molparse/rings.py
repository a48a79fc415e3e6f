"""Ring perception: smallest set of smallest rings as a minimum cycle basis."""

from __future__ import annotations

from collections import deque

from .graph import Bond, MolGraph, RingInfo


def _bfs_tree(start: int, adj) -> tuple[list[int], list[int]]:
    parent = [-1] * len(adj)
    parent_bond = [-1] * len(adj)
    seen = [False] * len(adj)
    seen[start] = True
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w, bi in adj[v]:
            if not seen[w]:
                seen[w] = True
                parent[w] = v
                parent_bond[w] = bi
                queue.append(w)
    return parent, parent_bond


def _path_to_root(v: int, parent: list[int], parent_bond: list[int]):
    atoms, bonds = [v], []
    while parent[v] != -1:
        bonds.append(parent_bond[v])
        v = parent[v]
        atoms.append(v)
    return atoms, bonds


def _candidate_cycles(n_atoms: int, bonds, adj) -> dict[int, tuple[int, ...]]:
    """Horton candidate set keyed by edge bitmask -> sorted atom tuple."""
    candidates: dict[int, tuple[int, ...]] = {}
    for x in range(n_atoms):
        parent, parent_bond = _bfs_tree(x, adj)
        for bi, b in enumerate(bonds):
            pu_atoms, pu_bonds = _path_to_root(b.begin, parent, parent_bond)
            pv_atoms, pv_bonds = _path_to_root(b.end, parent, parent_bond)
            if pu_atoms[-1] != x or pv_atoms[-1] != x:
                continue
            if bi in pu_bonds or bi in pv_bonds:
                continue
            if set(pu_atoms) & set(pv_atoms) != {x}:
                continue
            mask = 1 << bi
            for e in pu_bonds + pv_bonds:
                mask |= 1 << e
            if mask not in candidates:
                candidates[mask] = tuple(sorted(set(pu_atoms) | set(pv_atoms)))
    return candidates


def _reduce(vec: int, basis: dict[int, int]) -> int:
    while vec:
        pivot = vec.bit_length() - 1
        row = basis.get(pivot)
        if row is None:
            return vec
        vec ^= row
    return 0


def _components(n_atoms: int, adj) -> int:
    seen = [False] * n_atoms
    count = 0
    for s in range(n_atoms):
        if seen[s]:
            continue
        count += 1
        stack = [s]
        seen[s] = True
        while stack:
            v = stack.pop()
            for w, _ in adj[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
    return count


def find_rings(n_atoms: int, bonds: list[Bond] | tuple[Bond, ...], adj) -> RingInfo:
    """Compute SSSR and fused ring systems for a graph given as bonds + adjacency."""
    rank = len(bonds) - n_atoms + _components(n_atoms, adj)
    if rank <= 0:
        return RingInfo()
    candidates = sorted(
        _candidate_cycles(n_atoms, bonds, adj).items(),
        key=lambda kv: (len(kv[1]), kv[1], kv[0]),
    )
    basis: dict[int, int] = {}
    chosen: list[tuple[tuple[int, ...], int]] = []
    for mask, atoms in candidates:
        reduced = _reduce(mask, basis)
        if reduced:
            basis[reduced.bit_length() - 1] = reduced
            chosen.append((atoms, mask))
            if len(chosen) == rank:
                break

    rings = tuple(atoms for atoms, _ in chosen)
    ring_bonds = tuple(
        tuple(i for i in range(len(bonds)) if mask >> i & 1) for _, mask in chosen
    )
    return RingInfo(rings=rings, ring_systems=_merge_systems(rings), ring_bonds=ring_bonds)


def _merge_systems(rings: tuple[tuple[int, ...], ...]) -> tuple[tuple[int, ...], ...]:
    parent = list(range(len(rings)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[int, int] = {}
    for ri, ring in enumerate(rings):
        for a in ring:
            if a in owner:
                parent[find(ri)] = find(owner[a])
            else:
                owner[a] = ri
    groups: dict[int, set[int]] = {}
    for ri, ring in enumerate(rings):
        groups.setdefault(find(ri), set()).update(ring)
    return tuple(sorted(tuple(sorted(g)) for g in groups.values()))


def perceive_rings(mol: MolGraph) -> RingInfo:
    """Ring information for ``mol`` (computed once at parse time)."""
    return mol.ring_info
