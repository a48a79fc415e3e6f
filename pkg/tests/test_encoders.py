import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import multitask_grad_error, small_config
from oracles import corpus
from structgnn import autodiff as ad
from structgnn.encoders import Config, StructGNN, collate, dmpnn_encode, init_params, predict, struct_encode
from structgnn.errors import EmptyNodeSet
from structgnn.featurize import ATOM_FDIM, GLOBAL_FDIM
from structgnn.molparse import parse_smiles, random_smiles

CORPUS = corpus()


def test_config_validation():
    with pytest.raises(ValueError):
        Config(hidden_dim=0)
    with pytest.raises(ValueError):
        Config(message_steps=0)
    with pytest.raises(ValueError):
        Config(tasks=("logs",))
    with pytest.raises(ValueError):
        Config.from_dict({"bogus": 1})


def test_config_round_trip():
    c = Config(tasks=("logp", "logd"), seed=9, use_struct_encoder=False)
    assert Config.from_dict(c.to_dict()) == c
    assert c.digest() == Config.from_dict(c.to_dict()).digest()


@pytest.mark.parametrize("struct", [True, False])
@pytest.mark.parametrize("glob", [True, False])
def test_embedding_width(struct, glob):
    c = small_config(use_struct_encoder=struct, use_global_descriptors=glob)
    model = StructGNN(c)
    z = model.embed(collate([model.featurize("CCO")]))
    expected = c.hidden_dim + c.struct_hidden_dim * struct + GLOBAL_FDIM * glob
    assert z.shape == (1, expected) and c.embedding_dim == expected


def test_default_widths():
    assert Config().embedding_dim == 300 + 300 + 10
    assert Config(use_struct_encoder=False).embedding_dim == 310


def test_single_atom_molecule():
    c = small_config()
    model = StructGNN(c)
    feats = model.featurize("C")
    batch = collate([feats])
    h = dmpnn_encode(batch, model.params, c).data
    x = np.hstack([feats.atom_x, np.zeros((1, c.hidden_dim))])
    np.testing.assert_allclose(h, np.maximum(x @ model.params["W_atom"].data, 0.0), rtol=0, atol=1e-15)


def test_message_steps_matter():
    a, b = small_config(message_steps=1), small_config(message_steps=3)
    ma, mb = StructGNN(a), StructGNN(b)
    batch = collate([ma.featurize("CCO")])
    assert not np.allclose(dmpnn_encode(batch, ma.params, a).data, dmpnn_encode(batch, mb.params, b).data)


def test_struct_encoder_properties():
    params = init_params(small_config())
    model = StructGNN(small_config())
    rows = model.featurize("CC(=O)Oc1ccccc1C(=O)O").nodes
    one = struct_encode(rows[:1], np.zeros(1, dtype=int), 1, params).data
    direct = np.maximum(rows[:1] @ params["W_struct"].data + params["b_struct"].data, 0)
    np.testing.assert_allclose(one, direct, rtol=0, atol=1e-15)
    full = struct_encode(rows, np.zeros(len(rows), dtype=int), 1, params).data
    doubled = struct_encode(np.vstack([rows, rows]), np.zeros(2 * len(rows), dtype=int), 1, params).data
    np.testing.assert_allclose(full, doubled, rtol=0, atol=1e-12)
    perm = np.random.default_rng(0).permutation(len(rows))
    shuffled = struct_encode(rows[perm], np.zeros(len(rows), dtype=int), 1, params).data
    np.testing.assert_allclose(full, shuffled, rtol=0, atol=1e-12)
    with pytest.raises(EmptyNodeSet):
        struct_encode(rows[:0], np.zeros(0, dtype=int), 1, params)


def test_untrained_predictions_are_finite():
    for tasks in [("logp",), ("logp", "logd")]:
        model = StructGNN(small_config(tasks=tasks))
        out = predict(parse_smiles("CCN(CC)CC"), model)
        assert out.shape == (len(tasks),) and np.all(np.isfinite(out))


def test_ablation_matches_model_built_without_struct_params():
    on = StructGNN(small_config(use_struct_encoder=False))
    names = list(on.params)
    assert "W_struct" not in names
    # encoder weights are drawn first, so they match the full model's
    full = StructGNN(small_config())
    for k in ("W_in", "W_msg", "W_atom"):
        assert np.array_equal(on.params[k].data, full.params[k].data)
    again = StructGNN(small_config(use_struct_encoder=False))
    smi = ["CCO", "c1ccccc1C(=O)O"]
    assert np.array_equal(on.predict_smiles(smi), again.predict_smiles(smi))


def test_morgan_baseline_runs():
    c = small_config(model_type="morgan", fingerprint_bits=256)
    model = StructGNN(c)
    out = model.predict_smiles(["CCO", "c1ccccc1"])
    assert out.shape == (2, 2) and np.all(np.isfinite(out))
    assert c.embedding_dim == 256 + GLOBAL_FDIM
    assert "W_in" not in model.params


def test_batch_equals_individual():
    model = StructGNN(small_config())
    smi = ["CCO", "c1ccccc1", "C", "CS(N)(=O)=O"]
    together = model.predict_smiles(smi)
    alone = np.vstack([model.predict_smiles([s]) for s in smi])
    np.testing.assert_allclose(together, alone, rtol=0, atol=1e-12)


def test_full_model_gradients():
    assert multitask_grad_error() <= 1e-4


def test_sum_aggregation_gradients():
    assert multitask_grad_error(small_config(aggregation="sum", message_steps=2)) <= 1e-4


@settings(max_examples=40, deadline=None)
@given(idx=st.integers(0, len(CORPUS) - 1), seed=st.integers(0, 2**32 - 1))
def test_prediction_invariant_under_reordering(idx, seed):
    model = StructGNN(small_config(hidden_dim=16, struct_hidden_dim=8, head_hidden_dim=8))
    m = parse_smiles(CORPUS[idx])
    p = random_smiles(m, np.random.default_rng(seed))
    a = model.predict_smiles([CORPUS[idx]])
    b = model.predict_smiles([p])
    assert np.max(np.abs(a - b)) <= 1e-6


def test_atom_width_constant():
    assert StructGNN(small_config()).featurize("CCO").atom_x.shape[1] == ATOM_FDIM
