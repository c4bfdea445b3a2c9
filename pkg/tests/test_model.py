import math

import numpy as np
import pytest

from lwe_attack.codec import Vocab
from lwe_attack.data import LweParams, gen_plain_samples, gen_secret
from lwe_attack.model import ModelConfig, TrainedModel
from lwe_attack.predictors import PREDICTION_FAILED, acc_tau


def tiny_config(**kw):
    defaults = dict(enc_dim=64, dec_dim=64, enc_heads=2, dec_heads=2,
                    enc_loops=1, dec_loops=1, ffn_mult=2, batch_size=16,
                    epoch_size=64, lr=1e-3, warmup_steps=20, reuse_limit=10)
    defaults.update(kw)
    return ModelConfig(**defaults)


@pytest.fixture(scope="module")
def task():
    rng = np.random.default_rng(0)
    params = LweParams(n=4, q=251, sigma=0.0, hamming=2)
    secret = gen_secret(params, rng)
    train = gen_plain_samples(params, secret, 512, rng)
    return params, secret, train


def test_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(enc_layers=0)
    with pytest.raises(ValueError):
        ModelConfig(lr=0)
    paper = ModelConfig.paper_scale()
    assert (paper.enc_dim, paper.dec_dim) == (1024, 512)
    assert (paper.enc_loops, paper.dec_loops) == (2, 8)
    assert paper.lr == 1e-5 and paper.warmup_steps == 8000


def test_untrained_loss_near_chance(task):
    params, secret, train = task
    model = TrainedModel(tiny_config(), Vocab(81, 81), 4, 251, seed=3)
    loss = model.eval_loss(train)
    assert abs(loss - math.log(81)) / math.log(81) < 0.10


def test_first_epoch_beats_uniform(task):
    params, secret, train = task
    model = TrainedModel(tiny_config(epoch_size=512), Vocab(81, 81), 4, 251,
                         seed=3)
    stats = model.train_epoch(train, np.random.default_rng(0))
    assert math.isfinite(stats["mean_loss"])
    assert stats["mean_loss"] < math.log(81)
    assert stats["examples"] == 512


def test_memorizes_single_example(task):
    params, secret, train = task
    one = train.subset(slice(0, 1))
    model = TrainedModel(tiny_config(epoch_size=16, batch_size=16,
                                     reuse_limit=16), Vocab(81, 81), 4, 251,
                         seed=1)
    rng = np.random.default_rng(0)
    for _ in range(200):  # 200 tiny epochs over the same example
        stats = model.train_epoch(one, rng)
        if stats["mean_loss"] < 1e-3:
            break
    assert model.predict(one.a[0]) == one.b[0]


def test_greedy_decode_deterministic(task):
    params, secret, train = task
    model = TrainedModel(tiny_config(), Vocab(81, 81), 4, 251, seed=5)
    first = model.predict_batch(train.a[:32])
    second = model.predict_batch(train.a[:32])
    assert np.array_equal(first, second)


def test_same_seed_same_weights(task):
    params, secret, train = task
    a = TrainedModel(tiny_config(), Vocab(81, 81), 4, 251, seed=9)
    b = TrainedModel(tiny_config(), Vocab(81, 81), 4, 251, seed=9)
    assert np.array_equal(a.predict_batch(train.a[:16]),
                          b.predict_batch(train.a[:16]))


def test_predictions_valid_or_failed(task):
    params, secret, train = task
    model = TrainedModel(tiny_config(), Vocab(81, 81), 4, 251, seed=2)
    preds = model.predict_batch(train.a[:64])
    assert ((preds == PREDICTION_FAILED) | ((preds >= 0) & (preds < 251))).all()
    one = model.predict(train.a[0])
    assert one is None or 0 <= one < 251


def test_runaway_decode_is_failure_not_crash(task):
    params, secret, train = task
    model = TrainedModel(tiny_config(), Vocab(81, 81), 4, 251, seed=2)
    real_decode = model.module.decode

    def never_eos(dec_in, memory, memory_pad_mask):
        logits = real_decode(dec_in, memory, memory_pad_mask)
        logits[..., model.vocab.eos] = -1e9  # suppress termination
        return logits

    model.module.decode = never_eos
    preds = model.predict_batch(train.a[:8])
    assert (preds == PREDICTION_FAILED).all()
    assert model.predict(train.a[0]) is None


def test_copy_gate_toggle(task):
    """Gated and ungated variants run under the same config surface."""
    params, secret, train = task
    for gate in (True, False):
        cfg = tiny_config(copy_gate=gate, epoch_size=32)
        model = TrainedModel(cfg, Vocab(81, 81), 4, 251, seed=4)
        stats = model.train_epoch(train, np.random.default_rng(0))
        assert math.isfinite(stats["mean_loss"])
    gated = TrainedModel(tiny_config(copy_gate=True), Vocab(81, 81), 4, 251)
    ungated = TrainedModel(tiny_config(copy_gate=False), Vocab(81, 81), 4, 251)
    n_gated = sum(p.numel() for p in gated.module.parameters())
    n_ungated = sum(p.numel() for p in ungated.module.parameters())
    assert n_gated > n_ungated


def test_reuse_limit_guards_epoch(task):
    params, secret, train = task
    small = train.subset(slice(0, 4))
    model = TrainedModel(tiny_config(epoch_size=64, reuse_limit=10),
                         Vocab(81, 81), 4, 251)
    with pytest.raises(ValueError, match="reuse"):
        model.train_epoch(small, np.random.default_rng(0))


def test_checkpoint_roundtrip(task, tmp_path):
    params, secret, train = task
    model = TrainedModel(tiny_config(), Vocab(81, 7), 4, 251, seed=6)
    model.train_epoch(train, np.random.default_rng(0))
    path = tmp_path / "model.pt"
    model.save(path)
    back = TrainedModel.load(path)
    assert back.config == model.config
    assert (back.vocab.base_in, back.vocab.base_out) == (81, 7)
    assert back.step == model.step
    assert np.array_equal(back.predict_batch(train.a[:32]),
                          model.predict_batch(train.a[:32]))


def test_max_decode_length():
    model = TrainedModel(tiny_config(), Vocab(81, 81), 2, 251)
    assert model.max_decode_len == math.ceil(math.log(251, 81)) + 2


def test_acc_tau_with_trained_model(task):
    params, secret, train = task
    model = TrainedModel(tiny_config(), Vocab(81, 81), 4, 251, seed=7)
    acc = acc_tau(model, train, 0.1)
    assert 0.0 <= acc <= 1.0
