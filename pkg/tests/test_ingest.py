import pytest

from structgnn.errors import AllRowsRejected, FileUnreadable, MissingColumn
from structgnn.ingest import ingest_csv, write_dataset_csv
from structgnn.molparse import canonical_smiles, parse_smiles


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_merge_across_tasks(tmp_path):
    p = _write(tmp_path, "a.csv", "smiles,logp,logd\nCCO,0.5,\nOCC,,1.0\n")
    data, rep = ingest_csv(p)
    assert len(data) == 1
    s = data.samples[0]
    assert (s.logp, s.logd) == (0.5, 1.0)
    assert s.smiles == canonical_smiles(parse_smiles("CCO"))
    assert rep.dual_labeled == 1 and rep.unique == 1


def test_conflicting_duplicates_averaged(tmp_path):
    p = _write(tmp_path, "a.csv", "smiles,logp\nCCO,0.4\nCCO,0.6\n")
    data, rep = ingest_csv(p)
    assert len(data) == 1 and data.samples[0].logp == pytest.approx(0.5)
    assert rep.conflicting_duplicates == 1


def test_rejections_carry_reasons(tmp_path):
    p = _write(tmp_path, "a.csv", "smiles,logp\nC1CC,1.0\nCCO,1.0\nC[Xe],2\nCC.O,1\nCCC,\nCCCC,abc\n")
    data, rep = ingest_csv(p)
    assert len(data) == 1
    reasons = [r.reason for r in rep.rejected]
    assert reasons == ["UnclosedRing", "UnknownElement", "MultiFragment", "NoLabels", "BadLabel"]
    assert rep.rows_read == rep.accepted + len(rep.rejected)
    assert [r.row for r in rep.rejected] == [2, 4, 5, 6, 7]


def test_two_files_merge(tmp_path):
    a = _write(tmp_path, "p.csv", "smiles,logp\nc1ccccc1O,1.5\nCCN,0.1\n")
    b = _write(tmp_path, "d.csv", "smiles,logd\nOc1ccccc1,1.2\n")
    data, rep = ingest_csv([a, b])
    assert len(data) == 2 and rep.dual_labeled == 1


def test_custom_columns(tmp_path):
    p = _write(tmp_path, "a.csv", "SMILES,LogP\nCCO,0.5\n")
    data, _ = ingest_csv(p, smiles_col="SMILES", logp_col="LogP")
    assert data.samples[0].logp == 0.5


def test_errors(tmp_path):
    with pytest.raises(FileUnreadable):
        ingest_csv(tmp_path / "missing.csv")
    with pytest.raises(MissingColumn):
        ingest_csv(_write(tmp_path, "a.csv", "smi,logp\nCCO,1\n"))
    with pytest.raises(MissingColumn):
        ingest_csv(_write(tmp_path, "b.csv", "smiles,other\nCCO,1\n"))
    with pytest.raises(AllRowsRejected):
        ingest_csv(_write(tmp_path, "c.csv", "smiles,logp\nC1CC,1\n"))


def test_ingest_is_idempotent(tmp_path):
    p = _write(tmp_path, "a.csv", "smiles,logp,logd\nOCC,0.5,\nCCO,,1\nc1ccccc1C,2.7,2.1\nCc1ccccc1,2.8,\n")
    first, _ = ingest_csv(p)
    out = tmp_path / "out.csv"
    write_dataset_csv(first, out)
    second, rep = ingest_csv(out)
    assert second.samples == first.samples
    assert rep.conflicting_duplicates == 0
