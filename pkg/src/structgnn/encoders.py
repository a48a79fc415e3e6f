"""The directed-edge message passing encoder, the substructure set encoder and
the regression head.

Molecules are batched by stacking their atoms, directed edges and nodes into
single matrices; per-molecule readouts use segment means.
"""

from __future__ import annotations

import hashlib
import json
from collections.abc import Sequence
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import EmptyNodeSet
from .featurize import (
    ATOM_FDIM,
    BOND_FDIM,
    GLOBAL_FDIM,
    Standardizer,
    atom_feature_matrix,
    bond_feature_matrix,
    global_descriptors,
    morgan_fingerprint,
)
from .molparse import MolGraph, parse_smiles
from .molparse.canon import canonical_order
from .substruct import HYPER_FDIM, extract_substructures, node_set

TASKS = ("logp", "logd")


@dataclass
class Config:
    hidden_dim: int = 300
    message_steps: int = 3
    struct_hidden_dim: int = 300
    head_hidden_dim: int = 300
    tasks: tuple[str, ...] = ("logp",)
    use_struct_encoder: bool = True
    use_global_descriptors: bool = True
    model_type: str = "structgnn"  # or "morgan" for the fingerprint baseline
    fingerprint_radius: int = 2
    fingerprint_bits: int = 2048
    aggregation: str = "mean"
    dropout: float = 0.0
    seed: int = 0
    learning_rate: float = 1e-3
    batch_size: int = 50
    epochs: int = 30
    patience: int | None = 10

    def __post_init__(self) -> None:
        self.tasks = tuple(self.tasks)
        dims = (self.hidden_dim, self.struct_hidden_dim, self.head_hidden_dim, self.batch_size)
        if min(dims) < 1:
            raise ValueError("all dimensions must be >= 1")
        if self.message_steps < 1:
            raise ValueError("message_steps must be >= 1")
        if not 1 <= len(self.tasks) <= 2 or any(t not in TASKS for t in self.tasks):
            raise ValueError(f"tasks must be one or two of {TASKS}")
        if len(set(self.tasks)) != len(self.tasks):
            raise ValueError("duplicate task names")
        if self.model_type not in ("structgnn", "morgan"):
            raise ValueError(f"unknown model_type {self.model_type!r}")
        if self.aggregation not in ("mean", "sum"):
            raise ValueError("aggregation must be 'mean' or 'sum'")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    @property
    def embedding_dim(self) -> int:
        """Width of the vector fed to the head."""
        width = GLOBAL_FDIM if self.use_global_descriptors else 0
        if self.model_type == "morgan":
            return self.fingerprint_bits + width
        return self.hidden_dim + (self.struct_hidden_dim if self.use_struct_encoder else 0) + width

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tasks"] = list(self.tasks)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> Config:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class MolFeatures:
    """Everything the model needs about one molecule, computed once."""

    smiles: str
    atom_x: np.ndarray
    bond_x: np.ndarray
    bonds: np.ndarray  # (n_bonds, 2) atom index pairs
    nodes: np.ndarray
    descriptors: np.ndarray
    fingerprint: np.ndarray | None = None

    @property
    def n_atoms(self) -> int:
        return self.atom_x.shape[0]


def featurize_molecule(mol: MolGraph, smiles: str = "", config: Config | None = None) -> MolFeatures:
    order = canonical_order(mol)
    subs = extract_substructures(mol, order=order)
    fp = None
    if config is not None and config.model_type == "morgan":
        fp = morgan_fingerprint(mol, config.fingerprint_radius, config.fingerprint_bits)
    return MolFeatures(
        smiles=smiles,
        atom_x=atom_feature_matrix(mol, order),
        bond_x=bond_feature_matrix(mol),
        bonds=np.array([(b.begin, b.end) for b in mol.bonds], dtype=np.int64).reshape(-1, 2),
        nodes=node_set(mol, subs, order),
        descriptors=global_descriptors(mol),
        fingerprint=fp,
    )


@dataclass
class Batch:
    n_mols: int
    atom_x: np.ndarray
    edge_input: np.ndarray  # [x_source | bond features] per directed edge
    edge_src: np.ndarray
    edge_dst: np.ndarray
    edge_rev: np.ndarray
    atom_mol: np.ndarray
    nodes: np.ndarray
    node_mol: np.ndarray
    descriptors: np.ndarray
    fingerprints: np.ndarray | None = None


def collate(items: Sequence[MolFeatures]) -> Batch:
    atom_blocks, src, dst, edge_bond_x, atom_mol, node_mol = [], [], [], [], [], []
    offset = 0
    for m, f in enumerate(items):
        atom_blocks.append(f.atom_x)
        if len(f.bonds):
            b, e = f.bonds[:, 0] + offset, f.bonds[:, 1] + offset
            # directed edge 2k is begin->end, 2k+1 is end->begin
            src.append(np.stack([b, e], axis=1).reshape(-1))
            dst.append(np.stack([e, b], axis=1).reshape(-1))
            edge_bond_x.append(np.repeat(f.bond_x, 2, axis=0))
        atom_mol.append(np.full(f.n_atoms, m))
        node_mol.append(np.full(f.nodes.shape[0], m))
        offset += f.n_atoms
    atom_x = np.vstack(atom_blocks)
    edge_src = np.concatenate(src) if src else np.zeros(0, dtype=np.int64)
    edge_dst = np.concatenate(dst) if dst else np.zeros(0, dtype=np.int64)
    bond_x = np.vstack(edge_bond_x) if edge_bond_x else np.zeros((0, BOND_FDIM))
    fps = None
    if items and items[0].fingerprint is not None:
        fps = np.stack([f.fingerprint for f in items])
    return Batch(
        n_mols=len(items),
        atom_x=atom_x,
        edge_input=np.hstack([atom_x[edge_src], bond_x]),
        edge_src=edge_src,
        edge_dst=edge_dst,
        edge_rev=np.arange(len(edge_src)) ^ 1,
        atom_mol=np.concatenate(atom_mol),
        nodes=np.vstack([f.nodes for f in items]),
        node_mol=np.concatenate(node_mol),
        descriptors=np.stack([f.descriptors for f in items]),
        fingerprints=fps,
    )


# -- parameters -------------------------------------------------------------------


def init_params(config: Config) -> dict[str, Tensor]:
    """Glorot-uniform weights and zero biases, drawn in a fixed order.

    Groups switched off by the config consume no random numbers, so the
    remaining weights match a model built without them.
    """
    rng = np.random.default_rng(config.seed)
    shapes: list[tuple[str, tuple[int, int], bool]] = []
    if config.model_type == "structgnn":
        h = config.hidden_dim
        shapes += [
            ("W_in", (ATOM_FDIM + BOND_FDIM, h), True),
            ("W_msg", (h, h), True),
            ("W_atom", (ATOM_FDIM + h, h), True),
        ]
        if config.use_struct_encoder:
            shapes += [
                ("W_struct", (HYPER_FDIM, config.struct_hidden_dim), True),
                ("b_struct", (1, config.struct_hidden_dim), False),
            ]
    shapes += [
        ("W_head1", (config.embedding_dim, config.head_hidden_dim), True),
        ("b_head1", (1, config.head_hidden_dim), False),
        ("W_head2", (config.head_hidden_dim, config.n_tasks), True),
        ("b_head2", (1, config.n_tasks), False),
    ]
    params = {}
    for name, shape, is_weight in shapes:
        data = glorot(rng, shape) if is_weight else np.zeros(shape)
        params[name] = Tensor(data, requires_grad=True)
    return params


def glorot(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    return ad.glorot_uniform(rng, *shape)


def _readout(x: Tensor, segments: np.ndarray, n: int, aggregation: str) -> Tensor:
    if aggregation == "sum":
        return ad.segment_sum(x, segments, n)
    return ad.segment_mean(x, segments, n)


def dmpnn_encode(batch: Batch, params: dict[str, Tensor], config: Config) -> Tensor:
    """Directed-edge message passing; returns one h_d row per molecule."""
    n_atoms = batch.atom_x.shape[0]
    h0 = ad.relu(ad.matmul(Tensor(batch.edge_input), params["W_in"]))
    h = h0
    for _ in range(config.message_steps - 1):
        incoming = ad.segment_sum(h, batch.edge_dst, n_atoms)
        # sum over k in N(v) \ {w} of h_{k->v} = incoming[v] - h_{w->v}
        msg = ad.sub(ad.gather_rows(incoming, batch.edge_src), ad.gather_rows(h, batch.edge_rev))
        h = ad.relu(ad.add(h0, ad.matmul(msg, params["W_msg"])))
    atom_msg = ad.segment_sum(h, batch.edge_dst, n_atoms)
    atom_h = ad.relu(ad.matmul(ad.concat([Tensor(batch.atom_x), atom_msg]), params["W_atom"]))
    return _readout(atom_h, batch.atom_mol, batch.n_mols, config.aggregation)


def struct_encode(nodes: np.ndarray, node_mol: np.ndarray, n_mols: int,
                  params: dict[str, Tensor]) -> Tensor:
    """Mean over each molecule's node rows of relu(rows @ W_struct + b)."""
    if nodes.shape[0] == 0 or np.bincount(node_mol, minlength=n_mols).min() == 0:
        raise EmptyNodeSet("every molecule needs at least one node")
    hidden = ad.relu(ad.add(ad.matmul(Tensor(nodes), params["W_struct"]), params["b_struct"]))
    return ad.segment_mean(hidden, node_mol, n_mols)


def _dropout(x: Tensor, rate: float, rng: np.random.Generator | None) -> Tensor:
    if rng is None or rate <= 0.0:
        return x
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return ad.mul(x, keep)


class StructGNN:
    """Model parameters plus the descriptor standardizer fitted on training data."""

    def __init__(self, config: Config, params: dict[str, Tensor] | None = None,
                 scaler: Standardizer | None = None):
        self.config = config
        self.params = params if params is not None else init_params(config)
        self.scaler = scaler if scaler is not None else Standardizer.identity(GLOBAL_FDIM)
        self._cache: dict[str, MolFeatures] = {}

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def featurize(self, smiles: str) -> MolFeatures:
        feats = self._cache.get(smiles)
        if feats is None:
            feats = featurize_molecule(parse_smiles(smiles), smiles, self.config)
            self._cache[smiles] = feats
        return feats

    def embed(self, batch: Batch) -> Tensor:
        cfg = self.config
        parts = []
        if cfg.model_type == "morgan":
            parts.append(Tensor(batch.fingerprints))
        else:
            parts.append(dmpnn_encode(batch, self.params, cfg))
            if cfg.use_struct_encoder:
                parts.append(struct_encode(batch.nodes, batch.node_mol, batch.n_mols, self.params))
        if cfg.use_global_descriptors:
            parts.append(Tensor(self.scaler.transform(batch.descriptors)))
        return ad.concat(parts) if len(parts) > 1 else parts[0]

    def forward(self, batch: Batch, rng: np.random.Generator | None = None) -> Tensor:
        p = self.params
        z = _dropout(self.embed(batch), self.config.dropout, rng)
        hidden = ad.relu(ad.add(ad.matmul(z, p["W_head1"]), p["b_head1"]))
        hidden = _dropout(hidden, self.config.dropout, rng)
        return ad.add(ad.matmul(hidden, p["W_head2"]), p["b_head2"])

    def predict_features(self, items: Sequence[MolFeatures], batch_size: int = 256) -> np.ndarray:
        out = []
        with ad.no_grad():
            for start in range(0, len(items), batch_size):
                out.append(self.forward(collate(items[start : start + batch_size])).data)
        if not out:
            return np.zeros((0, self.config.n_tasks))
        return np.vstack(out)

    def predict_smiles(self, smiles: Sequence[str]) -> np.ndarray:
        return self.predict_features([self.featurize(s) for s in smiles])


def predict(mol: MolGraph, model: StructGNN) -> np.ndarray:
    """Predictions (length ``n_tasks``) for a single parsed molecule."""
    feats = featurize_molecule(mol, config=model.config)
    return model.predict_features([feats])[0]
