"""Regenerate tests/fixtures/parser_oracle.json from tests/fixtures/corpus.smi.

Requires RDKit, which is not a dependency of the package; run offline:

    PYTHONPATH=/path/to/rdkit python tools/make_parser_oracle.py
"""

import json
from pathlib import Path

from rdkit import Chem, rdBase

ROOT = Path(__file__).resolve().parents[1]


def main() -> None:
    params = Chem.SmilesParserParams()
    params.removeHs = False
    rows = []
    for line in (ROOT / "tests/fixtures/corpus.smi").read_text().splitlines():
        smi = line.strip()
        if not smi:
            continue
        mol = Chem.MolFromSmiles(smi, params)
        if mol is None:
            raise SystemExit(f"RDKit rejected {smi!r}")
        rows.append(
            {
                "smiles": smi,
                "n_atoms": mol.GetNumAtoms(),
                "n_bonds": mol.GetNumBonds(),
                "total_h": [a.GetTotalNumHs() for a in mol.GetAtoms()],
                "charges": [a.GetFormalCharge() for a in mol.GetAtoms()],
            }
        )
    out = {"generator": f"RDKit {rdBase.rdkitVersion}", "molecules": rows}
    (ROOT / "tests/fixtures/parser_oracle.json").write_text(json.dumps(out, indent=1) + "\n")
    print(f"wrote {len(rows)} molecules")


if __name__ == "__main__":
    main()
