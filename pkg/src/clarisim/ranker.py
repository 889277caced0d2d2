"""History-conditioned pairwise query ranker.

The model scores a candidate reformulation given the initial query and the
accumulated user feedback. Feedback turns are encoded elementwise with cos
(selected query) and sin (rejected query), run through an inner recurrent
cell, and the per-turn vectors are aggregated by an outer recurrent cell.
An MLP scores [q0 | candidate | history-context]; pairs are compared with a
logistic of the score difference and trained with the pairwise logistic loss.

Everything is plain numpy float64 with hand-written gradients, so the
backward pass can be verified against finite differences.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .embeddings import as_embedding
from .user_agent import FeedbackTurn, GreedyUser

MAGIC = b"RNKV1\n"


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 128
    learning_rate: float = 1e-4
    adam_beta1: float = 0.9
    adam_beta2: float = 0.99
    weight_decay: float = 0.01
    dropout_p: float = 0.3
    epochs: int = 5
    seed: int = 0
    # architecture / data-construction knobs
    hidden_turn: int = 32  # inner recurrent state size
    hidden_history: int = 32  # outer recurrent state size
    scorer_hidden: tuple = (64,)
    pairs_per_scenario: int = 64
    max_history_turns: int = 3

    def __post_init__(self):
        if self.batch_size < 1 or self.learning_rate <= 0 or self.epochs < 0:
            raise ValueError("batch_size, learning_rate and epochs must be positive")
        if not 0.0 <= self.dropout_p < 1.0:
            raise ValueError(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")


@dataclass
class RankerModel:
    dim: int
    hidden_turn: int
    hidden_history: int
    scorer_hidden: tuple
    dropout_p: float
    params: dict = field(default_factory=dict)

    @property
    def scorer_input_dim(self) -> int:
        return 2 * self.dim + self.hidden_history

    def param_names(self):
        names = ["in_Wx", "in_Wh", "in_b", "out_Wx", "out_Wh", "out_b"]
        for layer in range(len(self.scorer_hidden) + 1):
            names += [f"mlp_W{layer}", f"mlp_b{layer}"]
        return names

    def trainable(self):
        return {k: v for k, v in self.params.items() if k not in ("mu", "sigma")}


def init_model(
    dim: int,
    hidden_turn: int = 32,
    hidden_history: int = 32,
    scorer_hidden: tuple = (64,),
    dropout_p: float = 0.3,
    seed: int = 0,
) -> RankerModel:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization, seed-controlled."""
    rng = np.random.default_rng(seed)
    model = RankerModel(dim, hidden_turn, hidden_history, tuple(scorer_hidden), dropout_p)

    def uni(shape, fan_in):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=shape)

    p = {}
    p["in_Wx"] = uni((hidden_turn, dim), dim)
    p["in_Wh"] = uni((hidden_turn, hidden_turn), hidden_turn)
    p["in_b"] = uni(hidden_turn, dim)
    p["out_Wx"] = uni((hidden_history, hidden_turn), hidden_turn)
    p["out_Wh"] = uni((hidden_history, hidden_history), hidden_history)
    p["out_b"] = uni(hidden_history, hidden_turn)
    widths = list(scorer_hidden) + [1]
    prev = model.scorer_input_dim
    for layer, width in enumerate(widths):
        p[f"mlp_W{layer}"] = uni((width, prev), prev)
        p[f"mlp_b{layer}"] = uni(width, prev)
        prev = width
    p["mu"] = np.zeros(dim)
    p["sigma"] = np.ones(dim)
    model.params = p
    return model


def fit_standardization(model: RankerModel, scenarios) -> None:
    """Freeze per-feature affine input statistics from the training corpus.

    Stands in for batch normalization: deterministic and identical in train
    and eval mode.
    """
    rows = [sc.q0 for sc in scenarios] + [row for sc in scenarios for row in sc.candidates]
    stack = np.array(rows)
    model.params["mu"] = stack.mean(axis=0)
    model.params["sigma"] = np.maximum(stack.std(axis=0), 1e-8)


# ---------------------------------------------------------------------------
# forward / backward


def encode_turn(turn: FeedbackTurn, model: RankerModel):
    """Inner recurrence over [cos(q+), sin(q-)]; returns the final hidden state."""
    return _encode_turn_fwd(turn, model)[0]


def _encode_turn_fwd(turn: FeedbackTurn, model: RankerModel):
    p = model.params
    if turn.selected.size != model.dim:
        raise ValueError(f"turn dim {turn.selected.size} vs model dim {model.dim}")
    x1 = np.cos(turn.selected)
    x2 = np.sin(turn.rejected)
    h1 = np.tanh(p["in_Wx"] @ x1 + p["in_b"])
    h2 = np.tanh(p["in_Wx"] @ x2 + p["in_Wh"] @ h1 + p["in_b"])
    return h2, (x1, x2, h1, h2)


def _encode_history_fwd(turns, model: RankerModel):
    p = model.params
    g = np.zeros(model.hidden_history)
    turn_caches, states = [], []
    for turn in turns:
        u, cache = _encode_turn_fwd(turn, model)
        g_prev = g
        g = np.tanh(p["out_Wx"] @ u + p["out_Wh"] @ g_prev + p["out_b"])
        turn_caches.append(cache)
        states.append((u, g_prev, g))
    return g, (turn_caches, states)


def encode_history(history, model: RankerModel) -> np.ndarray:
    """Outer recurrence over per-turn encodings; empty history -> zero vector."""
    ctx, _ = _encode_history_fwd(list(history), model)
    return ctx


def _history_backward(cache, dctx, model: RankerModel, grads) -> None:
    """BPTT through outer then inner recurrences, accumulating into grads."""
    p = model.params
    turn_caches, states = cache
    dg = dctx
    for (u, g_prev, g), (x1, x2, h1, h2) in zip(reversed(states), reversed(turn_caches)):
        dpre = dg * (1.0 - g * g)
        grads["out_Wx"] += np.outer(dpre, u)
        grads["out_Wh"] += np.outer(dpre, g_prev)
        grads["out_b"] += dpre
        du = p["out_Wx"].T @ dpre
        dg = p["out_Wh"].T @ dpre
        # inner cell, two steps
        dpre2 = du * (1.0 - h2 * h2)
        grads["in_Wx"] += np.outer(dpre2, x2)
        grads["in_Wh"] += np.outer(dpre2, h1)
        grads["in_b"] += dpre2
        dh1 = p["in_Wh"].T @ dpre2
        dpre1 = dh1 * (1.0 - h1 * h1)
        grads["in_Wx"] += np.outer(dpre1, x1)
        grads["in_b"] += dpre1


def _scorer_forward(model: RankerModel, Z: np.ndarray, masks=None):
    """MLP over rows of Z (already standardized+context-concatenated).

    masks: per hidden layer, inverted-dropout multipliers (mask / (1-p)) of
    shape matching the activations; None means eval mode.
    """
    p = model.params
    a = Z
    inputs = [a]  # layer inputs (post-dropout)
    tanh_outs = []  # pre-dropout tanh activations
    n_hidden = len(model.scorer_hidden)
    for layer in range(n_hidden):
        pre = a @ p[f"mlp_W{layer}"].T + p[f"mlp_b{layer}"]
        tanh_out = np.tanh(pre)
        tanh_outs.append(tanh_out)
        a = tanh_out * masks[layer] if masks is not None else tanh_out
        inputs.append(a)
    s = a @ p[f"mlp_W{n_hidden}"].T + p[f"mlp_b{n_hidden}"]
    return s[:, 0], (inputs, tanh_outs)


def _scorer_backward(model: RankerModel, cache, masks, ds, grads):
    """Backward through the MLP; returns gradient w.r.t. the input rows Z."""
    p = model.params
    inputs, tanh_outs = cache
    n_hidden = len(model.scorer_hidden)
    d_out = ds[:, None]  # (B, 1)
    grads[f"mlp_W{n_hidden}"] += d_out.T @ inputs[n_hidden]
    grads[f"mlp_b{n_hidden}"] += d_out.sum(axis=0)
    da = d_out @ p[f"mlp_W{n_hidden}"]
    for layer in range(n_hidden - 1, -1, -1):
        if masks is not None:
            da = da * masks[layer]
        tanh_out = tanh_outs[layer]
        dpre = da * (1.0 - tanh_out * tanh_out)
        grads[f"mlp_W{layer}"] += dpre.T @ inputs[layer]
        grads[f"mlp_b{layer}"] += dpre.sum(axis=0)
        da = dpre @ p[f"mlp_W{layer}"]
    return da


def _standardize(model: RankerModel, X: np.ndarray) -> np.ndarray:
    return (X - model.params["mu"]) / model.params["sigma"]


def _draw_masks(model: RankerModel, n_rows: int, rng) -> list | None:
    if model.dropout_p <= 0.0:
        return None
    keep = 1.0 - model.dropout_p
    return [
        (rng.random((n_rows, width)) < keep).astype(np.float64) / keep
        for width in model.scorer_hidden
    ]


def score(q0, candidate, history, model: RankerModel, train_mode: bool = False, rng=None) -> float:
    """Score one candidate given q0 and the interaction history.

    Eval mode is deterministic; train mode applies inverted dropout drawn
    from rng.
    """
    q0 = as_embedding(q0, dim=model.dim)
    candidate = as_embedding(candidate, dim=model.dim)
    ctx = encode_history(history, model)
    Z = np.concatenate([_standardize(model, q0), _standardize(model, candidate), ctx])[None, :]
    masks = None
    if train_mode and model.dropout_p > 0.0:
        if rng is None:
            raise ValueError("train_mode scoring needs an rng for dropout masks")
        masks = _draw_masks(model, 1, rng)
    s, _ = _scorer_forward(model, Z, masks)
    return float(s[0])


def score_candidates(q0, candidates, history, model: RankerModel) -> np.ndarray:
    """Eval-mode scores for a batch of candidates sharing q0 and history."""
    candidates = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
    if candidates.shape[1] != model.dim:
        raise ValueError(f"candidate dim {candidates.shape[1]} vs model dim {model.dim}")
    q0 = as_embedding(q0, dim=model.dim)
    ctx = encode_history(history, model)
    n = candidates.shape[0]
    Z = np.concatenate(
        [
            np.tile(_standardize(model, q0), (n, 1)),
            _standardize(model, candidates),
            np.tile(ctx, (n, 1)),
        ],
        axis=1,
    )
    s, _ = _scorer_forward(model, Z, None)
    return s


def pairwise_prob(s_i: float, s_j: float) -> float:
    """Logistic of the score difference; P(i beats j) + P(j beats i) = 1."""
    return float(_sigmoid(np.float64(s_i) - np.float64(s_j)))


def _sigmoid(x):
    out = np.empty_like(x, dtype=np.float64) if isinstance(x, np.ndarray) else None
    if out is None:
        return 1.0 / (1.0 + np.exp(-x)) if x >= 0 else np.exp(x) / (1.0 + np.exp(x))
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def rank_candidates(scenario, remaining, history, model: RankerModel):
    """Indices from `remaining` sorted by descending score, ties by index."""
    remaining = list(remaining)
    if not remaining:
        raise ValueError("no candidates left to rank")
    scores = score_candidates(scenario.q0, scenario.candidates[remaining], history, model)
    order = sorted(range(len(remaining)), key=lambda t: (-scores[t], remaining[t]))
    return [remaining[t] for t in order]


# ---------------------------------------------------------------------------
# training


def _rollout_history(scenario, n_turns: int, rng) -> tuple:
    """Greedy-user rollout over randomly proposed pairs; yields the feedback
    distribution the encoder will see at simulation time."""
    user = GreedyUser()
    turns = []
    for _ in range(n_turns):
        i, j = rng.choice(scenario.m, size=2, replace=False)
        turn = user.select(
            ((int(i), scenario.candidates[int(i)]), (int(j), scenario.candidates[int(j)])),
            scenario.intent.embedding,
        )
        turns.append(turn)
    return tuple(turns)


def _sample_pairs(scenario, n_pairs: int, rng):
    """Candidate index pairs (i, j) with label_i > label_j.

    Resamples equal-label draws (bounded) so uniform-label scenarios cannot
    silently starve the batch stream."""
    pairs = []
    labels = scenario.labels
    for _ in range(8 * n_pairs):
        if len(pairs) >= n_pairs:
            break
        i, j = rng.choice(scenario.m, size=2, replace=False)
        i, j = int(i), int(j)
        if labels[i] == labels[j]:
            continue
        if labels[i] < labels[j]:
            i, j = j, i
        pairs.append((i, j))
    return pairs


def has_trainable_pairs(scenarios) -> bool:
    return any(len(set(sc.labels)) > 1 for sc in scenarios)


def train(scenarios, cfg: TrainConfig, log: list | None = None, epoch_callback=None) -> RankerModel:
    """Train the ranker with AdamW on the pairwise logistic loss.

    Deterministic given cfg.seed. Raises if no scenario offers a pair of
    differently-labeled candidates. `log` (optional list) collects per-epoch
    {"epoch", "loss"} records; `epoch_callback(model, epoch)` runs after each
    epoch (read-only use, e.g. held-out evaluation).
    """
    scenarios = list(scenarios)
    if not scenarios:
        raise ValueError("no training scenarios")
    if not has_trainable_pairs(scenarios):
        raise ValueError("degenerate supervision: every scenario has uniform labels")
    dim = scenarios[0].dim
    rng = np.random.default_rng(cfg.seed)
    model = init_model(
        dim,
        hidden_turn=cfg.hidden_turn,
        hidden_history=cfg.hidden_history,
        scorer_hidden=cfg.scorer_hidden,
        dropout_p=cfg.dropout_p,
        seed=int(rng.integers(2**32)),
    )
    fit_standardization(model, scenarios)

    trainable = sorted(model.trainable())
    adam_m = {k: np.zeros_like(model.params[k]) for k in trainable}
    adam_v = {k: np.zeros_like(model.params[k]) for k in trainable}
    step = 0

    for epoch in range(cfg.epochs):
        samples = []  # (history_key, i, j)
        histories = {}
        for s_idx, sc in enumerate(scenarios):
            n_turns = int(rng.integers(0, cfg.max_history_turns + 1))
            histories[s_idx] = (sc, _rollout_history(sc, n_turns, rng))
            for i, j in _sample_pairs(sc, cfg.pairs_per_scenario, rng):
                samples.append((s_idx, i, j))
        rng.shuffle(samples)

        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, len(samples), cfg.batch_size):
            batch = samples[start : start + cfg.batch_size]
            loss = _train_step(model, batch, histories, cfg, rng, adam_m, adam_v, step)
            step += 1
            epoch_loss += loss
            n_batches += 1
        if log is not None:
            log.append({"epoch": epoch, "loss": epoch_loss / max(n_batches, 1)})
        if epoch_callback is not None:
            epoch_callback(model, epoch)
    return model


def _train_step(model, batch, histories, cfg, rng, adam_m, adam_v, step) -> float:
    p = model.params
    B = len(batch)

    # encode each distinct history once; rows i then rows j share contexts
    ctx_cache = {}
    for s_idx, _, _ in batch:
        if s_idx not in ctx_cache:
            sc, turns = histories[s_idx]
            ctx_cache[s_idx] = _encode_history_fwd(turns, model)

    Z = np.empty((2 * B, model.scorer_input_dim))
    for row, (s_idx, i, j) in enumerate(batch):
        sc, _ = histories[s_idx]
        ctx = ctx_cache[s_idx][0]
        q0s = _standardize(model, sc.q0)
        Z[row] = np.concatenate([q0s, _standardize(model, sc.candidates[i]), ctx])
        Z[B + row] = np.concatenate([q0s, _standardize(model, sc.candidates[j]), ctx])

    masks = _draw_masks(model, 2 * B, rng)
    s, cache = _scorer_forward(model, Z, masks)
    diff = s[:B] - s[B:]
    prob = _sigmoid(diff)
    loss = float(np.mean(-np.log(np.maximum(prob, 1e-300))))

    ds = np.empty(2 * B)
    ds[:B] = (prob - 1.0) / B
    ds[B:] = (1.0 - prob) / B
    grads = {k: np.zeros_like(p[k]) for k in adam_m}
    dZ = _scorer_backward(model, cache, masks, ds, grads)
    dctx = dZ[:, 2 * model.dim :]
    for s_idx, (ctx, hcache) in ctx_cache.items():
        rows = [r for r, (sx, _, _) in enumerate(batch) if sx == s_idx]
        if not hcache[1]:
            continue  # empty history: context is a constant zero vector
        d = dctx[rows].sum(axis=0) + dctx[[B + r for r in rows]].sum(axis=0)
        _history_backward(hcache, d, model, grads)

    # AdamW: decoupled weight decay on weight matrices
    t = step + 1
    lr, b1, b2 = cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2
    for k in sorted(grads):
        g = grads[k]
        adam_m[k] = b1 * adam_m[k] + (1 - b1) * g
        adam_v[k] = b2 * adam_v[k] + (1 - b2) * g * g
        m_hat = adam_m[k] / (1 - b1**t)
        v_hat = adam_v[k] / (1 - b2**t)
        p[k] = p[k] - lr * m_hat / (np.sqrt(v_hat) + 1e-8)
        if cfg.weight_decay > 0 and p[k].ndim == 2:
            p[k] = p[k] * (1.0 - lr * cfg.weight_decay)
    return loss


def evaluate_pairwise_accuracy(model, scenarios, pairs_per_scenario: int = 64, seed: int = 0) -> float:
    """Fraction of differently-labeled candidate pairs ordered correctly by the
    eval-mode scorer (empty history)."""
    rng = np.random.default_rng(seed)
    correct = total = 0
    for sc in scenarios:
        pairs = _sample_pairs(sc, pairs_per_scenario, rng)
        if not pairs:
            continue
        scores = score_candidates(sc.q0, sc.candidates, (), model)
        for i, j in pairs:  # label_i > label_j by construction
            correct += scores[i] > scores[j]
            total += 1
    if total == 0:
        raise ValueError("no evaluable pairs")
    return correct / total


# ---------------------------------------------------------------------------
# gradient verification


def _pair_loss_forward(model, q0, cand_i, cand_j, turns, masks):
    ctx, hcache = _encode_history_fwd(turns, model)
    q0s = _standardize(model, q0)
    Z = np.stack(
        [
            np.concatenate([q0s, _standardize(model, cand_i), ctx]),
            np.concatenate([q0s, _standardize(model, cand_j), ctx]),
        ]
    )
    s, cache = _scorer_forward(model, Z, masks)
    prob = _sigmoid(s[0] - s[1])
    loss = -np.log(max(prob, 1e-300))
    return float(loss), (prob, cache, hcache)


@dataclass
class GradCheckReport:
    """Relative errors between analytic and finite-difference gradients."""

    max_rel_error: float
    per_tensor: dict

    def __str__(self):
        parts = ", ".join(f"{n}={e:.3g}" for n, e in sorted(self.per_tensor.items()))
        return f"max_rel_error={self.max_rel_error:.3g} ({parts})"


def gradient_check(model: RankerModel, sample, step: float = 1e-4, seed: int = 0) -> GradCheckReport:
    """Compare analytic gradients of the pairwise loss against central finite
    differences over every trainable parameter.

    sample: (q0, cand_i, cand_j, history_turns). Dropout masks are drawn once
    from seed and held fixed for both gradient computations.
    """
    q0, cand_i, cand_j, turns = sample
    turns = list(turns)
    rng = np.random.default_rng(seed)
    masks = _draw_masks(model, 2, rng)

    loss, (prob, cache, hcache) = _pair_loss_forward(model, q0, cand_i, cand_j, turns, masks)
    grads = {k: np.zeros_like(v) for k, v in model.trainable().items()}
    ds = np.array([prob - 1.0, 1.0 - prob])
    dZ = _scorer_backward(model, cache, masks, ds, grads)
    if turns:
        _history_backward(hcache, dZ[0, 2 * model.dim :] + dZ[1, 2 * model.dim :], model, grads)

    per_tensor = {}
    for name in sorted(grads):
        tensor = model.params[name]
        flat = tensor.reshape(-1)
        tensor_err = 0.0
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + step
            lp, _ = _pair_loss_forward(model, q0, cand_i, cand_j, turns, masks)
            flat[idx] = orig - step
            lm, _ = _pair_loss_forward(model, q0, cand_i, cand_j, turns, masks)
            flat[idx] = orig
            numeric = (lp - lm) / (2 * step)
            analytic = grads[name].reshape(-1)[idx]
            denom = max(abs(analytic), abs(numeric))
            if denom < 1e-10:
                continue
            tensor_err = max(tensor_err, abs(analytic - numeric) / denom)
        per_tensor[name] = tensor_err
    return GradCheckReport(max(per_tensor.values()), per_tensor)


# ---------------------------------------------------------------------------
# persistence


def save_model(model: RankerModel, path) -> None:
    """Binary model file: magic, dims, hyperparameters, then f64 tensors in
    the order mu, sigma, followed by model.param_names()."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(
            struct.pack(
                "<IIII",
                model.dim,
                model.hidden_turn,
                model.hidden_history,
                len(model.scorer_hidden),
            )
        )
        for width in model.scorer_hidden:
            fh.write(struct.pack("<I", width))
        fh.write(struct.pack("<d", model.dropout_p))
        for name in ["mu", "sigma"] + model.param_names():
            fh.write(model.params[name].astype("<f8").tobytes())


def load_model(path) -> RankerModel:
    with open(path, "rb") as fh:
        if fh.read(len(MAGIC)) != MAGIC:
            raise ValueError(f"{path}: not a ranker model file (bad magic)")
        raw = fh.read(16)
        if len(raw) != 16:
            raise ValueError(f"{path}: truncated header")
        dim, h1, h2, n_hidden = struct.unpack("<IIII", raw)
        widths = []
        for _ in range(n_hidden):
            widths.append(struct.unpack("<I", fh.read(4))[0])
        (dropout_p,) = struct.unpack("<d", fh.read(8))
        model = RankerModel(dim, h1, h2, tuple(widths), dropout_p)
        shapes = _tensor_shapes(model)
        params = {}
        for name in ["mu", "sigma"] + model.param_names():
            shape = shapes[name]
            n = int(np.prod(shape))
            data = fh.read(8 * n)
            if len(data) != 8 * n:
                raise ValueError(f"{path}: truncated tensor {name!r}")
            params[name] = np.frombuffer(data, dtype="<f8").reshape(shape).copy()
        if fh.read(1):
            raise ValueError(f"{path}: trailing bytes after tensors")
        model.params = params
        return model


def _tensor_shapes(model: RankerModel) -> dict:
    dim, h1, h2 = model.dim, model.hidden_turn, model.hidden_history
    shapes = {
        "mu": (dim,),
        "sigma": (dim,),
        "in_Wx": (h1, dim),
        "in_Wh": (h1, h1),
        "in_b": (h1,),
        "out_Wx": (h2, h1),
        "out_Wh": (h2, h2),
        "out_b": (h2,),
    }
    prev = model.scorer_input_dim
    for layer, width in enumerate(list(model.scorer_hidden) + [1]):
        shapes[f"mlp_W{layer}"] = (width, prev)
        shapes[f"mlp_b{layer}"] = (width,)
        prev = width
    return shapes


# ---------------------------------------------------------------------------
# estimator facade


class PairwiseQueryRanker(BaseEstimator):
    """Sklearn-style wrapper around the pairwise ranker.

    fit() trains on a sequence of ClarificationScenario; afterwards the fitted
    model lives in ``model_`` and per-epoch losses in ``train_log_``.
    """

    def __init__(
        self,
        batch_size: int = 128,
        learning_rate: float = 1e-4,
        adam_beta1: float = 0.9,
        adam_beta2: float = 0.99,
        weight_decay: float = 0.01,
        dropout_p: float = 0.3,
        epochs: int = 5,
        hidden_turn: int = 32,
        hidden_history: int = 32,
        scorer_hidden: tuple = (64,),
        pairs_per_scenario: int = 64,
        max_history_turns: int = 3,
        seed: int = 0,
    ):
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.adam_beta1 = adam_beta1
        self.adam_beta2 = adam_beta2
        self.weight_decay = weight_decay
        self.dropout_p = dropout_p
        self.epochs = epochs
        self.hidden_turn = hidden_turn
        self.hidden_history = hidden_history
        self.scorer_hidden = scorer_hidden
        self.pairs_per_scenario = pairs_per_scenario
        self.max_history_turns = max_history_turns
        self.seed = seed

    def _config(self) -> TrainConfig:
        return TrainConfig(
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            adam_beta1=self.adam_beta1,
            adam_beta2=self.adam_beta2,
            weight_decay=self.weight_decay,
            dropout_p=self.dropout_p,
            epochs=self.epochs,
            seed=self.seed,
            hidden_turn=self.hidden_turn,
            hidden_history=self.hidden_history,
            scorer_hidden=tuple(self.scorer_hidden),
            pairs_per_scenario=self.pairs_per_scenario,
            max_history_turns=self.max_history_turns,
        )

    def fit(self, scenarios, y=None):
        log = []
        self.model_ = train(scenarios, self._config(), log=log)
        self.train_log_ = log
        return self

    def _check_fitted(self):
        if not hasattr(self, "model_"):
            raise ValueError("ranker is not fitted; call fit() or load() first")

    def score_candidates(self, q0, candidates, history=()):
        self._check_fitted()
        return score_candidates(q0, candidates, history, self.model_)

    def rank(self, scenario, remaining=None, history=()):
        self._check_fitted()
        if remaining is None:
            remaining = range(scenario.m)
        return rank_candidates(scenario, remaining, history, self.model_)

    def predict_pair(self, q0, cand_i, cand_j, history=()):
        """P(candidate i is more effective than candidate j)."""
        s = self.score_candidates(q0, np.stack([cand_i, cand_j]), history)
        return pairwise_prob(s[0], s[1])

    def save(self, path):
        self._check_fitted()
        save_model(self.model_, path)

    @classmethod
    def from_file(cls, path) -> "PairwiseQueryRanker":
        est = cls()
        est.model_ = load_model(path)
        est.train_log_ = []
        return est
