"""Regenerate src/structgnn/data/desk_sample.csv (500 molecules).

The molecules are enumerated from ring cores and substituents. Their labels
are SYNTHETIC: logp is the Wildman-Crippen estimate from RDKit plus Gaussian
noise (sd 0.15), and logd subtracts fixed penalties for carboxylic acids and
basic aliphatic amines. They exist to exercise the training pipeline, not to
stand in for experimental measurements.

Requires RDKit (offline only):

    PYTHONPATH=/path/to/rdkit python tools/make_desk_sample.py
"""

import csv
from pathlib import Path

import numpy as np
from rdkit import Chem
from rdkit.Chem import Crippen

from structgnn.molparse import canonical_smiles, parse_smiles

ROOT = Path(__file__).resolve().parents[1]

CORES = [
    "c1ccc(cc1){}", "c1ccc(cc1){}", "c1cc({})ccc1{}", "c1cccc({})c1{}", "c1cc({})cc({})c1",
    "c1ccc2cc({})ccc2c1", "c1ccncc1{}", "c1cc({})ncc1", "c1ccc({})nc1{}", "c1csc({})c1",
    "c1coc({})c1", "c1cc({})[nH]c1", "Cn1ccc({})c1", "c1ncc({})cn1", "c1ccc2[nH]c({})cc2c1",
    "c1ccc2oc({})cc2c1", "c1ccc2sc({})nc2c1", "C1CCC(CC1){}", "C1CCC({})CC1{}", "C1CC({})CC1",
    "C1CCN(CC1){}", "C1COCCN1{}", "C1CN(CCN1){}", "O1CCC({})CC1", "C{}", "CC{}", "CCC({})C",
    "CC(C){}", "CCCC{}", "CC(C)(C){}", "C(=C{}){}", "OCC{}", "CCOC(=O){}", "{}C(=O)N{}",
    "CC(=O)N({})C", "c1ccc(cc1)C{}", "c1ccc(cc1)CC{}", "c1ccc(cc1)O{}", "c1ccc(cc1)N{}",
    "c1ccc(cc1)S(=O)(=O)N{}", "c1ccc(cc1)C(=O){}", "{}CC(=O)O", "{}CCN", "{}OC",
]
SUBSTITUENTS = [
    "C", "CC", "CCC", "C(C)C", "C(C)(C)C", "CCCC", "F", "Cl", "Br", "I", "O", "OC", "OCC",
    "N", "NC", "N(C)C", "C(=O)O", "C(=O)OC", "C(=O)N", "C(=O)C", "C#N", "[N+](=O)[O-]",
    "C(F)(F)F", "S(=O)(=O)N", "S(C)(=O)=O", "SC", "c1ccccc1", "C1CC1", "C1CCCCC1",
    "c1ccncc1", "CO", "CN", "CCO", "CCN(C)C", "OC(=O)C", "NC(=O)C", "CC(=O)O", "c1ccoc1",
]


def synth_labels(mol, rng):
    logp = Crippen.MolLogP(mol) + rng.normal(0, 0.15)
    acids = len(mol.GetSubstructMatches(Chem.MolFromSmarts("C(=O)[OX2H1]")))
    amines = len(mol.GetSubstructMatches(Chem.MolFromSmarts("[NX3;H2,H1,H0;!$(NC=O);!$(N-a);!$(NS=O);!$(N-[N,O])]([C;!$(C=*)])")))
    logd = logp - 2.5 * min(acids, 1) - 1.2 * min(amines, 1) + rng.normal(0, 0.15)
    return round(float(logp), 3), round(float(logd), 3)


def main(n: int = 500, seed: int = 11) -> None:
    rng = np.random.default_rng(seed)
    seen = {}
    while len(seen) < n:
        core = CORES[rng.integers(len(CORES))]
        subs = [SUBSTITUENTS[rng.integers(len(SUBSTITUENTS))] for _ in range(core.count("{}"))]
        mol = Chem.MolFromSmiles(core.format(*subs))
        if mol is None or mol.GetNumHeavyAtoms() > 30:
            continue
        smi = Chem.MolToSmiles(mol)
        key = canonical_smiles(parse_smiles(smi))
        if key in seen:
            continue
        seen[key] = (smi, mol)

    rows = []
    for smi, mol in seen.values():
        logp, logd = synth_labels(mol, rng)
        r = rng.random()
        if r < 0.6:
            rows.append((smi, logp, ""))
        elif r < 0.85:
            rows.append((smi, "", logd))
        else:
            rows.append((smi, logp, logd))

    out = ROOT / "src/structgnn/data/desk_sample.csv"
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["smiles", "logp", "logd"])
        w.writerows(rows)
    print(f"wrote {len(rows)} rows to {out}")


if __name__ == "__main__":
    main()
