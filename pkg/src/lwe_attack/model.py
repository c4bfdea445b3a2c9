"""Gated universal sequence-to-sequence transformer over digit tokens.

The architecture family: an asymmetric encoder/decoder where the last
layer on each side is a shared layer iterated a configurable number of
times, with an elementwise copy gate letting positions skip a shared
iteration.  Defaults are desk-scale (256/128 dims, 4/4 heads, 2/2
loops); `ModelConfig.paper_scale()` expresses the full-size variant
(1024/512 dims, 16/4 heads, 2/8 loops).

Training minimizes token-level cross-entropy on (a -> b) pairs with Adam
under linear warmup followed by inverse-square-root decay.  Inference is
greedy decoding; anything that does not spell a residue below q within
the length budget is a prediction failure, never a crash.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn

from .codec import Vocab, encode_rows
from .data import SampleSet
from .predictors import PREDICTION_FAILED, Predictor


@dataclass(frozen=True)
class ModelConfig:
    enc_layers: int = 2
    dec_layers: int = 2
    enc_dim: int = 256
    dec_dim: int = 128
    enc_heads: int = 4
    dec_heads: int = 4
    enc_loops: int = 2
    dec_loops: int = 2
    copy_gate: bool = True
    ffn_mult: int = 4
    dropout: float = 0.0
    lr: float = 3e-4
    warmup_steps: int = 1000
    batch_size: int = 32
    epoch_size: int = 300_000
    reuse_limit: int = 10
    eval_batch: int = 512

    def __post_init__(self):
        for name in ("enc_layers", "dec_layers", "enc_dim", "dec_dim",
                     "enc_heads", "dec_heads", "enc_loops", "dec_loops",
                     "warmup_steps", "batch_size", "epoch_size", "reuse_limit"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be positive")

    @classmethod
    def paper_scale(cls, **overrides) -> "ModelConfig":
        """Full-size configuration: 1024/512 dims, 16/4 heads, 2/8 loops,
        Adam at 1e-5 with 8000 warmup steps."""
        base = dict(enc_dim=1024, dec_dim=512, enc_heads=16, dec_heads=4,
                    enc_loops=2, dec_loops=8, lr=1e-5, warmup_steps=8000)
        base.update(overrides)
        return cls(**base)


class _LoopedStack(nn.Module):
    """n_layers distinct layers; the last is iterated `loops` times, each
    iteration blended with its input through an elementwise copy gate."""

    def __init__(self, layers, loops: int, dim: int, copy_gate: bool):
        super().__init__()
        self.layers = nn.ModuleList(layers)
        self.loops = loops
        self.gate = nn.Linear(dim, dim) if copy_gate else None

    def run(self, x, apply_layer):
        last = len(self.layers) - 1
        for li, layer in enumerate(self.layers):
            for _ in range(self.loops if li == last else 1):
                u = apply_layer(layer, x)
                if self.gate is not None and li == last:
                    g = torch.sigmoid(self.gate(x))
                    x = g * u + (1 - g) * x
                else:
                    x = u
        return x


class _Seq2Seq(nn.Module):
    def __init__(self, cfg: ModelConfig, vocab_size: int, pad_id: int,
                 max_src_len: int, max_tgt_len: int):
        super().__init__()
        self.cfg = cfg
        self.pad_id = pad_id
        self.src_embed = nn.Embedding(vocab_size, cfg.enc_dim, padding_idx=pad_id)
        self.tgt_embed = nn.Embedding(vocab_size, cfg.dec_dim, padding_idx=pad_id)
        self.src_pos = nn.Embedding(max_src_len, cfg.enc_dim)
        self.tgt_pos = nn.Embedding(max_tgt_len, cfg.dec_dim)

        def enc_layer():
            return nn.TransformerEncoderLayer(
                d_model=cfg.enc_dim, nhead=cfg.enc_heads,
                dim_feedforward=cfg.ffn_mult * cfg.enc_dim,
                dropout=cfg.dropout, batch_first=True, norm_first=True)

        def dec_layer():
            return nn.TransformerDecoderLayer(
                d_model=cfg.dec_dim, nhead=cfg.dec_heads,
                dim_feedforward=cfg.ffn_mult * cfg.dec_dim,
                dropout=cfg.dropout, batch_first=True, norm_first=True)

        self.encoder = _LoopedStack([enc_layer() for _ in range(cfg.enc_layers)],
                                    cfg.enc_loops, cfg.enc_dim, cfg.copy_gate)
        self.decoder = _LoopedStack([dec_layer() for _ in range(cfg.dec_layers)],
                                    cfg.dec_loops, cfg.dec_dim, cfg.copy_gate)
        self.enc_norm = nn.LayerNorm(cfg.enc_dim)
        self.dec_norm = nn.LayerNorm(cfg.dec_dim)
        self.bridge = (nn.Identity() if cfg.enc_dim == cfg.dec_dim
                       else nn.Linear(cfg.enc_dim, cfg.dec_dim))
        self.out_proj = nn.Linear(cfg.dec_dim, vocab_size)
        # near-uniform initial logits: start from the chance-level loss
        nn.init.normal_(self.out_proj.weight, std=1e-3)
        nn.init.zeros_(self.out_proj.bias)

    def encode(self, src):
        pad_mask = src == self.pad_id
        pos = torch.arange(src.shape[1], device=src.device)
        x = self.src_embed(src) * math.sqrt(self.cfg.enc_dim) + self.src_pos(pos)
        x = self.encoder.run(
            x, lambda layer, h: layer(h, src_key_padding_mask=pad_mask))
        return self.bridge(self.enc_norm(x)), pad_mask

    def decode(self, dec_in, memory, memory_pad_mask):
        t = dec_in.shape[1]
        causal = torch.triu(
            torch.ones(t, t, dtype=torch.bool, device=dec_in.device), diagonal=1)
        pos = torch.arange(t, device=dec_in.device)
        y = self.tgt_embed(dec_in) * math.sqrt(self.cfg.dec_dim) + self.tgt_pos(pos)
        y = self.decoder.run(
            y, lambda layer, h: layer(
                h, memory, tgt_mask=causal,
                tgt_key_padding_mask=(dec_in == self.pad_id),
                memory_key_padding_mask=memory_pad_mask))
        return self.out_proj(self.dec_norm(y))

    def forward(self, src, dec_in):
        memory, pad_mask = self.encode(src)
        return self.decode(dec_in, memory, pad_mask)


class TrainedModel(Predictor):
    """The trainable Predictor: transformer weights + vocabulary + modulus."""

    def __init__(self, config: ModelConfig, vocab: Vocab, n: int, q: int,
                 seed: int = 0):
        self.config = config
        self.vocab = vocab
        self.n = n
        self.q = q
        self.max_decode_len = math.ceil(math.log(q, vocab.base_out)) + 2
        max_src = n * vocab.in_digits(q) + (n - 1) + 2
        max_tgt = self.max_decode_len + 3
        torch.manual_seed(seed)
        self.module = _Seq2Seq(config, vocab.size, vocab.pad, max_src, max_tgt)
        self.optimizer = torch.optim.Adam(self.module.parameters(), lr=config.lr)
        self.step = 0

    def _lr_factor(self) -> float:
        step = max(1, self.step)
        w = self.config.warmup_steps
        return min(step / w, math.sqrt(w / step))

    def train_epoch(self, train: SampleSet, rng: np.random.Generator) -> dict:
        """One pass of epoch_size examples drawn from `train` (cycling
        through permutations when the set is smaller, up to reuse_limit
        visits per stored sample).  Returns token-level loss statistics."""
        cfg = self.config
        m = len(train)
        if m == 0:
            raise ValueError("empty training set")
        passes = math.ceil(cfg.epoch_size / m)
        if passes > cfg.reuse_limit:
            raise ValueError(
                f"epoch of {cfg.epoch_size} needs {passes} visits per sample, "
                f"reuse limit is {cfg.reuse_limit}")
        order = np.concatenate([rng.permutation(m) for _ in range(passes)])
        order = order[: cfg.epoch_size]

        self.module.train()
        total_loss, total_tokens, batches = 0.0, 0, 0
        loss_fn = nn.CrossEntropyLoss(ignore_index=self.vocab.pad,
                                      reduction="sum")
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            src, dec_in, tgt = encode_rows(train.a[idx], train.b[idx],
                                           self.q, self.vocab)
            src_t = torch.from_numpy(src)
            logits = self.module(src_t, torch.from_numpy(dec_in))
            tgt_t = torch.from_numpy(tgt)
            loss = loss_fn(logits.reshape(-1, logits.shape[-1]), tgt_t.reshape(-1))
            n_tok = int((tgt_t != self.vocab.pad).sum())
            if not torch.isfinite(loss):
                raise RuntimeError(
                    f"non-finite training loss at step {self.step}")
            self.optimizer.zero_grad()
            (loss / n_tok).backward()
            torch.nn.utils.clip_grad_norm_(self.module.parameters(), 1.0)
            self.step += 1
            for group in self.optimizer.param_groups:
                group["lr"] = self.config.lr * self._lr_factor()
            self.optimizer.step()
            total_loss += loss.detach().item()
            total_tokens += n_tok
            batches += 1
        return {
            "mean_loss": total_loss / total_tokens,
            "examples": len(order),
            "batches": batches,
            "tokens": total_tokens,
        }

    def eval_loss(self, test: SampleSet) -> float:
        """Mean token-level cross-entropy without updating weights."""
        self.module.eval()
        loss_fn = nn.CrossEntropyLoss(ignore_index=self.vocab.pad,
                                      reduction="sum")
        total, tokens = 0.0, 0
        with torch.no_grad():
            for start in range(0, len(test), self.config.eval_batch):
                idx = slice(start, start + self.config.eval_batch)
                src, dec_in, tgt = encode_rows(test.a[idx], test.b[idx],
                                               self.q, self.vocab)
                logits = self.module(torch.from_numpy(src),
                                     torch.from_numpy(dec_in))
                tgt_t = torch.from_numpy(tgt)
                total += float(loss_fn(logits.reshape(-1, logits.shape[-1]),
                                       tgt_t.reshape(-1)))
                tokens += int((tgt_t != self.vocab.pad).sum())
        return total / tokens

    def predict_batch(self, A: np.ndarray) -> np.ndarray:
        A = np.asarray(A, dtype=np.int64)
        out = np.full(A.shape[0], PREDICTION_FAILED, dtype=np.int64)
        self.module.eval()
        with torch.no_grad():
            for start in range(0, A.shape[0], self.config.eval_batch):
                chunk = A[start : start + self.config.eval_batch]
                out[start : start + chunk.shape[0]] = self._greedy_chunk(chunk)
        return out

    def _greedy_chunk(self, A: np.ndarray) -> np.ndarray:
        vocab = self.vocab
        src, _, _ = encode_rows(A, np.zeros(A.shape[0], dtype=np.int64),
                                self.q, vocab)
        memory, pad_mask = self.module.encode(torch.from_numpy(src))
        m = A.shape[0]
        tokens = torch.full((m, 1), vocab.bos, dtype=torch.long)
        for _ in range(self.max_decode_len + 1):
            logits = self.module.decode(tokens, memory, pad_mask)
            nxt = logits[:, -1].argmax(dim=-1, keepdim=True)
            tokens = torch.cat([tokens, nxt], dim=1)
            if bool((nxt == vocab.eos).all()):
                break
        out = np.full(m, PREDICTION_FAILED, dtype=np.int64)
        seqs = tokens[:, 1:].numpy()
        for i in range(m):
            row = seqs[i]
            ends = np.flatnonzero(row == vocab.eos)
            if ends.size == 0:
                continue  # never terminated: failure
            digits = row[: ends[0]]
            if digits.size == 0 or (digits >= vocab.base_out).any():
                continue
            value = 0
            for d in digits:
                value = value * vocab.base_out + int(d)
            if value < self.q:
                out[i] = value
        return out

    def save(self, path) -> None:
        torch.save({
            "config": asdict(self.config),
            "vocab": {"base_in": self.vocab.base_in,
                      "base_out": self.vocab.base_out},
            "n": self.n,
            "q": self.q,
            "step": self.step,
            "state": self.module.state_dict(),
        }, str(path))

    @classmethod
    def load(cls, path) -> "TrainedModel":
        blob = torch.load(str(path), map_location="cpu", weights_only=False)
        model = cls(ModelConfig(**blob["config"]), Vocab(**blob["vocab"]),
                    blob["n"], blob["q"])
        model.module.load_state_dict(blob["state"])
        model.step = blob["step"]
        return model


def train_epoch(model: TrainedModel, train: SampleSet,
                rng: np.random.Generator) -> dict:
    return model.train_epoch(train, rng)


def predict_greedy(model: TrainedModel, a) -> int | None:
    return model.predict(a)
