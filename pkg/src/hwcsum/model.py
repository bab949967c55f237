"""Attentional encoder-decoder over pluggable vocabularies.

A single-layer unidirectional gated recurrent cell (update/reset gates,
tanh candidate) encodes the source; the decoder runs the same cell
shape over target embeddings, attends to the encoder states with a
bilinear score, and predicts through an attentional hidden layer

    comb = tanh(W_c [context; hidden]),  logits = comb W_out.

The decoder state carried between steps is the cell hidden, not the
attentional hidden. Dropout sits on embedding outputs and on comb.
Whether the source side is word ids or char ids is the caller's
business; the model only sees id sequences.
"""

import json
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .numerics import Adagrad, Tape, Tensor, init_uniform
from .rng import MT19937
from .tokenizer import BOS, EOS, EncodedPair


@dataclass
class ModelConfig:
    src_vocab_size: int
    tgt_vocab_size: int
    embed_dim: int = 500
    hidden_dim: int = 500
    dropout: float = 0.3
    max_decode_len: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.embed_dim <= 0 or self.hidden_dim <= 0:
            raise ValueError("embed_dim and hidden_dim must be positive")
        if self.src_vocab_size < 5 or self.tgt_vocab_size < 5:
            raise ValueError("vocabulary sizes must be at least 5 (4 specials + 1)")
        if not (0.0 <= self.dropout < 1.0):
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.max_decode_len < 0:
            raise ValueError("max_decode_len must be >= 0")


def _param_shapes(cfg: ModelConfig):
    s, t, e, h = cfg.src_vocab_size, cfg.tgt_vocab_size, cfg.embed_dim, cfg.hidden_dim
    shapes = [("src_emb", (s, e)), ("tgt_emb", (t, e))]
    for side in ("enc", "dec"):
        for gate in ("z", "r", "h"):
            shapes += [
                (f"{side}_w{gate}", (e, h)),
                (f"{side}_u{gate}", (h, h)),
                (f"{side}_b{gate}", (h,)),
            ]
    shapes += [("att_w", (h, h)), ("comb_w", (2 * h, h)), ("out_w", (h, t))]
    return shapes


@dataclass
class ModelParams:
    config: ModelConfig
    tensors: dict[str, Tensor] = field(default_factory=dict)

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def copy(self) -> "ModelParams":
        return ModelParams(self.config, {k: t.copy() for k, t in self.tensors.items()})


def init_params(config: ModelConfig, rng: MT19937 | None = None) -> ModelParams:
    """Fresh parameters, uniform(-0.1, 0.1), drawn in a fixed name order."""
    rng = rng or MT19937(config.seed)
    tensors = {name: init_uniform(shape, rng) for name, shape in _param_shapes(config)}
    return ModelParams(config, tensors)


def _cell(tape: Tape, params: ModelParams, side: str, x: Tensor, h: Tensor) -> Tensor:
    # z = update gate, r = reset gate, candidate via tanh
    p = params.tensors
    z = tape.sigmoid(tape.add(tape.add(tape.matmul(x, p[f"{side}_wz"]),
                                       tape.matmul(h, p[f"{side}_uz"])), p[f"{side}_bz"]))
    r = tape.sigmoid(tape.add(tape.add(tape.matmul(x, p[f"{side}_wr"]),
                                       tape.matmul(h, p[f"{side}_ur"])), p[f"{side}_br"]))
    cand = tape.tanh(tape.add(tape.add(tape.matmul(x, p[f"{side}_wh"]),
                                       tape.matmul(tape.mul(r, h), p[f"{side}_uh"])), p[f"{side}_bh"]))
    return tape.add(tape.mul(z, h), tape.mul(tape.one_minus(z), cand))


def encode_sequence(src_ids, params: ModelParams, *, tape: Tape | None = None,
                    training: bool = False, rng: MT19937 | None = None):
    """Run the encoder cell left to right; returns (states, final_state)."""
    if not src_ids:
        raise ValueError("cannot encode an empty source sequence")
    tape = tape if tape is not None else Tape(recording=False)
    cfg = params.config
    h = Tensor(np.zeros(cfg.hidden_dim))
    states = []
    for i in src_ids:
        x = tape.embedding_lookup(params["src_emb"], i)
        x = tape.dropout(x, cfg.dropout, rng, training)
        h = _cell(tape, params, "enc", x, h)
        states.append(h)
    return states, states[-1]


def _attend(tape: Tape, dec_h: Tensor, enc_mat: Tensor, params: ModelParams):
    # bilinear score s_i = dec_h^T W enc_i, then a softmax-weighted sum
    q = tape.matmul(dec_h, params["att_w"])
    scores = tape.matmul(enc_mat, q)
    weights = tape.softmax(scores)
    context = tape.matmul(weights, enc_mat)
    return context, weights


def attention(decoder_hidden: Tensor, encoder_states: list[Tensor], params: ModelParams,
              *, tape: Tape | None = None):
    """Context vector and attention weights for one decoder state."""
    if not encoder_states:
        raise ValueError("attention needs at least one encoder state")
    tape = tape if tape is not None else Tape(recording=False)
    return _attend(tape, decoder_hidden, tape.stack(encoder_states), params)


def _project(tape, prev_id, state, enc_mat, params, training, rng):
    cfg = params.config
    x = tape.embedding_lookup(params["tgt_emb"], prev_id)
    x = tape.dropout(x, cfg.dropout, rng, training)
    h = _cell(tape, params, "dec", x, state)
    context, weights = _attend(tape, h, enc_mat, params)
    comb = tape.tanh(tape.matmul(tape.concat(context, h), params["comb_w"]))
    comb = tape.dropout(comb, cfg.dropout, rng, training)
    logits = tape.matmul(comb, params["out_w"])
    return logits, h, weights


def decode_step(prev_id: int, decoder_state: Tensor, encoder_states, params: ModelParams,
                *, tape: Tape | None = None, training: bool = False,
                rng: MT19937 | None = None):
    """One decoder step: (log-prob row, new state, attention weights)."""
    tape = tape if tape is not None else Tape(recording=False)
    enc_mat = tape.stack(encoder_states) if isinstance(encoder_states, list) else encoder_states
    logits, h, weights = _project(tape, prev_id, decoder_state, enc_mat, params, training, rng)
    return tape.log_softmax(logits), h, weights


def sequence_loss(pair: EncodedPair, params: ModelParams, *, tape: Tape | None = None,
                  training: bool = False, rng: MT19937 | None = None) -> Tensor:
    """Teacher-forced mean token cross-entropy over tgt_ids[1:]."""
    tape = tape if tape is not None else Tape(recording=False)
    states, final = encode_sequence(pair.src_ids, params, tape=tape, training=training, rng=rng)
    enc_mat = tape.stack(states)
    state = final
    losses = []
    for t in range(1, len(pair.tgt_ids)):
        logits, state, _ = _project(tape, pair.tgt_ids[t - 1], state, enc_mat, params, training, rng)
        probs = tape.softmax(logits)
        losses.append(tape.cross_entropy(probs, pair.tgt_ids[t]))
    return tape.mean_scalars(losses)


def _np_log_softmax(x: np.ndarray) -> np.ndarray:
    z = x - x.max()
    return z - np.log(np.exp(z).sum())


def greedy_decode(src_ids, params: ModelParams, max_len: int | None = None):
    """Argmax decoding; returns (content token ids, accumulated log-prob).

    Ties at the argmax go to the smallest token id. The </s> emission,
    when it happens, is included in the log-prob but stripped from the
    returned ids.
    """
    max_len = params.config.max_decode_len if max_len is None else max_len
    tape = Tape(recording=False)
    states, final = encode_sequence(src_ids, params, tape=tape)
    enc_mat = tape.stack(states)
    state, prev = final, BOS
    out: list[int] = []
    total = 0.0
    for _ in range(max_len):
        logits, state, _ = _project(tape, prev, state, enc_mat, params, False, None)
        lp = _np_log_softmax(logits.data)
        tid = int(np.argmax(lp))
        total += float(lp[tid])
        if tid == EOS:
            break
        out.append(tid)
        prev = tid
    return out, total


@dataclass
class Hypothesis:
    """A partial or finished beam entry; token_ids starts with <s>."""

    token_ids: list[int]
    log_prob: float
    state: Tensor | None


def _beam(step_fn, vocab_size: int, beam_width: int, max_len: int,
          init_state: Tensor) -> Hypothesis:
    if beam_width < 1:
        raise ValueError(f"beam_width must be >= 1, got {beam_width}")
    live = [Hypothesis([BOS], 0.0, init_state)]
    finalized: list[tuple[float, list[int]]] = []
    for _ in range(max_len):
        if not live or len(finalized) >= beam_width:
            break
        candidates = []
        for hyp in live:
            lp_row, new_state = step_fn(hyp.token_ids[-1], hyp.state)
            if vocab_size <= beam_width:
                chosen = range(vocab_size)
            else:
                # stable sort keeps ascending id order among ties
                chosen = np.argsort(-lp_row, kind="stable")[:beam_width]
            for tid in chosen:
                tid = int(tid)
                candidates.append(
                    (hyp.log_prob + float(lp_row[tid]), hyp.token_ids + [tid], new_state))
        candidates.sort(key=lambda c: (-c[0], c[1]))
        live = []
        for score, ids, st in candidates[:beam_width]:
            if ids[-1] == EOS:
                finalized.append((score, ids))
            else:
                live.append(Hypothesis(ids, score, st))
    # hypotheses still live at the length cutoff compete as they stand
    finalized.extend((h.log_prob, h.token_ids) for h in live)
    score, ids = min(finalized, key=lambda f: (-f[0], f[1]))
    return Hypothesis(ids, score, None)


def beam_search_full(src_ids, params: ModelParams, beam_width: int,
                     max_len: int | None = None) -> Hypothesis:
    """Beam search returning the winning hypothesis with its log-prob.

    No length normalization; score ties break toward the
    lexicographically smaller token id sequence.
    """
    max_len = params.config.max_decode_len if max_len is None else max_len
    tape = Tape(recording=False)
    states, final = encode_sequence(src_ids, params, tape=tape)
    enc_mat = tape.stack(states)

    def step(prev_id, state):
        logits, h, _ = _project(tape, prev_id, state, enc_mat, params, False, None)
        return _np_log_softmax(logits.data), h

    return _beam(step, params.config.tgt_vocab_size, beam_width, max_len, final)


def beam_search(src_ids, params: ModelParams, beam_width: int,
                max_len: int | None = None) -> list[int]:
    """Best token id sequence with <s>/</s> stripped."""
    hyp = beam_search_full(src_ids, params, beam_width, max_len)
    ids = hyp.token_ids
    ids = ids[1:] if ids and ids[0] == BOS else ids
    ids = ids[:-1] if ids and ids[-1] == EOS else ids
    return ids


def train(pairs: list[EncodedPair], config: ModelConfig, *, epochs: int,
          batch_size: int = 32, learning_rate: float = 0.15,
          valid_pairs: list[EncodedPair] | None = None, log_fn=None):
    """Teacher-forced Adagrad training; returns (params, per-epoch history).

    One MT19937 session stream seeded from config.seed drives parameter
    init, the per-epoch shuffle, and dropout masks, so a run is fully
    reproducible. A mini-batch is gradient accumulation over its
    examples (mean of per-example gradients) followed by one Adagrad
    step. When a validation set is given, the best-validation-loss
    parameters are kept and returned; otherwise the final ones.
    """
    if not pairs:
        raise ValueError("training needs at least one pair")
    rng = MT19937(config.seed)
    params = init_params(config, rng)
    opt = Adagrad(params.tensors, learning_rate=learning_rate)
    history = []
    best_loss = float("inf")
    best_params = None

    for epoch in range(1, epochs + 1):
        t0 = time.perf_counter()
        order = list(range(len(pairs)))
        rng.shuffle(order)
        epoch_losses = []
        for start in range(0, len(order), batch_size):
            batch = order[start:start + batch_size]
            opt.zero_grad()
            for idx in batch:
                tape = Tape()
                loss = sequence_loss(pairs[idx], params, tape=tape, training=True, rng=rng)
                value = float(loss.data)
                if not np.isfinite(value):
                    raise RuntimeError(
                        f"training diverged: loss={value} at epoch {epoch}, pair index {idx}")
                tape.backward(loss)
                epoch_losses.append(value)
            for p in params.tensors.values():
                if p.grad is not None:
                    p.grad /= len(batch)
            opt.step()
        entry = {
            "epoch": epoch,
            "train_loss": float(np.mean(epoch_losses)),
            "seconds": time.perf_counter() - t0,
        }
        if valid_pairs:
            vloss = float(np.mean([float(sequence_loss(p, params).data) for p in valid_pairs]))
            entry["valid_loss"] = vloss
            if vloss < best_loss:
                best_loss = vloss
                best_params = params.copy()
        history.append(entry)
        if log_fn:
            log_fn(entry)

    if valid_pairs and best_params is not None:
        return best_params, history
    return params, history


CHECKPOINT_VERSION = 1


def save_checkpoint(params: ModelParams, path):
    """Single-file container: named float64 tensors plus the config."""
    meta = json.dumps({"format_version": CHECKPOINT_VERSION, "config": asdict(params.config)},
                      sort_keys=True)
    np.savez(path, __meta__=meta, **{k: t.data for k, t in params.tensors.items()})


def load_checkpoint(path) -> ModelParams:
    with np.load(path, allow_pickle=False) as archive:
        meta = json.loads(str(archive["__meta__"]))
        if meta.get("format_version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta.get('format_version')}")
        config = ModelConfig(**meta["config"])
        tensors = {k: Tensor(archive[k]) for k in archive.files if k != "__meta__"}
    expected = dict(_param_shapes(config))
    if set(tensors) != set(expected):
        raise ValueError("checkpoint parameter names do not match the config")
    for name, t in tensors.items():
        if t.data.shape != expected[name]:
            raise ValueError(f"checkpoint {name} has shape {t.data.shape}, expected {expected[name]}")
    return ModelParams(config, tensors)
