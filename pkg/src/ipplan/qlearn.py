"""Recurrent Q-learning for budget-constrained informative path planning.

The action-value function is a single-layer LSTM over the coordinate
sequence of the partial walk, read out linearly into one Q-value per graph
vertex.  Everything is plain numpy: forward passes, backpropagation through
time, Adam, the prioritized replay buffer.  No autodiff framework.

Non-neighbor actions are suppressed by adding a large negative mask to the
Q-vector before the argmax; ties break toward the lowest vertex id.  Training
follows double Q-learning: the online network picks the argmax at the next
state, the periodically synced target network prices it.
"""

from __future__ import annotations

import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .env import (
    EpisodeState,
    ProblemInstance,
    Transition,
    explore_action,
    naive_action,
    reset,
    step,
    valid_actions,
)
from .gp import NumericalError
from .graph import SpatialGraph

__all__ = [
    "MASK_PENALTY",
    "QNetwork",
    "action_mask",
    "q_forward",
    "masked_q",
    "greedy_action",
    "ReplayBuffer",
    "AdamState",
    "td_loss_and_grads",
    "td_update",
    "TrainingConfig",
    "TrainResult",
    "RolloutResult",
    "train",
    "greedy_rollout",
    "save_checkpoint",
    "load_checkpoint",
    "CheckpointError",
]

MASK_PENALTY = -1.0e6
PRIORITY_EPS = 1e-6


class CheckpointError(ValueError):
    """Checkpoint bytes are malformed, truncated, or from another layout."""


# ---- network ----


def _graph_normalization(graph: SpatialGraph) -> tuple[np.ndarray, np.ndarray]:
    """Affine map sending the graph bounding box onto [-1, 1] per axis."""
    xmin, ymin, xmax, ymax = graph.bounding_box()
    mid = np.array([(xmin + xmax) / 2.0, (ymin + ymax) / 2.0])
    span = np.array([xmax - xmin, ymax - ymin])
    scale = np.where(span > 0, 2.0 / np.where(span > 0, span, 1.0), 0.0)
    return mid, scale


class QNetwork:
    """LSTM over normalized coordinates, linear readout to |V| Q-values.

    Gate layout in the stacked weight matrices is ``[input, forget, cell,
    output]``.  The forget-gate bias starts at one, a standard stabilizer.
    """

    def __init__(
        self,
        n_vertices: int,
        hidden_size: int,
        norm_offset: np.ndarray,
        norm_scale: np.ndarray,
        rng: np.random.Generator | None = None,
    ):
        self.n_vertices = n_vertices
        self.hidden_size = hidden_size
        self.norm_offset = np.asarray(norm_offset, dtype=float)
        self.norm_scale = np.asarray(norm_scale, dtype=float)
        H = hidden_size
        rng = rng if rng is not None else np.random.default_rng(0)
        self.params: dict[str, np.ndarray] = {
            "Wx": rng.normal(0.0, 1.0 / math.sqrt(2), size=(2, 4 * H)),
            "Wh": rng.normal(0.0, 1.0 / math.sqrt(H), size=(H, 4 * H)),
            "b": np.zeros(4 * H),
            "Wy": rng.normal(0.0, 1.0 / math.sqrt(H), size=(H, n_vertices)),
            "by": np.zeros(n_vertices),
        }
        self.params["b"][H : 2 * H] = 1.0

    @classmethod
    def from_graph(
        cls, graph: SpatialGraph, hidden_size: int = 64, seed: int = 0
    ) -> "QNetwork":
        off, scale = _graph_normalization(graph)
        return cls(
            graph.n_vertices, hidden_size, off, scale, np.random.default_rng(seed)
        )

    def copy(self) -> "QNetwork":
        dup = QNetwork.__new__(QNetwork)
        dup.n_vertices = self.n_vertices
        dup.hidden_size = self.hidden_size
        dup.norm_offset = self.norm_offset.copy()
        dup.norm_scale = self.norm_scale.copy()
        dup.params = {k: v.copy() for k, v in self.params.items()}
        return dup

    def normalize(self, coords: np.ndarray) -> np.ndarray:
        return (np.asarray(coords, dtype=float) - self.norm_offset) * self.norm_scale

    # forward over a batch of variable-length sequences, padded to the longest

    def forward_batch(self, coord_seqs: list[np.ndarray], need_cache: bool = False):
        B = len(coord_seqs)
        H = self.hidden_size
        lengths = np.array([len(s) for s in coord_seqs])
        if np.any(lengths == 0):
            raise ValueError("every input sequence needs at least one point")
        Lmax = int(lengths.max())
        X = np.zeros((Lmax, B, 2))
        for i, s in enumerate(coord_seqs):
            X[: len(s), i, :] = self.normalize(s)
        Wx, Wh, b = self.params["Wx"], self.params["Wh"], self.params["b"]
        h = np.zeros((B, H))
        c = np.zeros((B, H))
        h_states = np.empty((Lmax, B, H))
        cache = [] if need_cache else None
        for t in range(Lmax):
            z = X[t] @ Wx + h @ Wh + b
            zi, zf, zg, zo = z[:, :H], z[:, H : 2 * H], z[:, 2 * H : 3 * H], z[:, 3 * H :]
            gi = expit(zi)
            gf = expit(zf)
            gg = np.tanh(zg)
            go = expit(zo)
            c_new = gf * c + gi * gg
            tc = np.tanh(c_new)
            h_new = go * tc
            if need_cache:
                cache.append((X[t], h, c, gi, gf, gg, go, tc))
            h, c = h_new, c_new
            h_states[t] = h_new
        h_last = h_states[lengths - 1, np.arange(B), :]
        Q = h_last @ self.params["Wy"] + self.params["by"]
        return Q, (lengths, h_states, cache, h_last)

    def backward_batch(self, fwd, dQ: np.ndarray) -> dict[str, np.ndarray]:
        """Gradients of a scalar loss with upstream dQ at each sequence end."""
        lengths, h_states, cache, h_last = fwd
        if cache is None:
            raise ValueError("forward pass was run without need_cache=True")
        H = self.hidden_size
        B = dQ.shape[0]
        Wh, Wy = self.params["Wh"], self.params["Wy"]
        grads = {k: np.zeros_like(v) for k, v in self.params.items()}
        grads["Wy"] = h_last.T @ dQ
        grads["by"] = dQ.sum(axis=0)
        dh_out = dQ @ Wy.T
        Lmax = len(cache)
        dh_next = np.zeros((B, H))
        dc_next = np.zeros((B, H))
        for t in range(Lmax - 1, -1, -1):
            x_t, h_prev, c_prev, gi, gf, gg, go, tc = cache[t]
            dh = dh_next.copy()
            ends_here = lengths - 1 == t
            if np.any(ends_here):
                dh[ends_here] += dh_out[ends_here]
            dc = dc_next + dh * go * (1.0 - tc * tc)
            do = dh * tc
            di = dc * gg
            df = dc * c_prev
            dg = dc * gi
            dz = np.concatenate(
                [
                    di * gi * (1.0 - gi),
                    df * gf * (1.0 - gf),
                    dg * (1.0 - gg * gg),
                    do * go * (1.0 - go),
                ],
                axis=1,
            )
            grads["Wx"] += x_t.T @ dz
            grads["Wh"] += h_prev.T @ dz
            grads["b"] += dz.sum(axis=0)
            dh_next = dz @ Wh.T
            dc_next = dc * gf
        return grads


def q_forward(net: QNetwork, coords: np.ndarray) -> np.ndarray:
    """Q-values for a single coordinate sequence of shape (L, 2)."""
    Q, _ = net.forward_batch([np.asarray(coords, dtype=float).reshape(-1, 2)])
    return Q[0]


def action_mask(graph: SpatialGraph, vertex: int, penalty: float = MASK_PENALTY) -> np.ndarray:
    """Additive mask: zero at neighbors of ``vertex``, ``penalty`` elsewhere."""
    m = np.full(graph.n_vertices, penalty)
    for u in graph.neighbors(vertex):
        m[graph.index_of(u)] = 0.0
    return m


def masked_q(net: QNetwork, graph: SpatialGraph, path: list[int]) -> np.ndarray:
    """Q-values of the walk's end state with non-neighbors masked out."""
    coords = np.asarray([graph.position(v) for v in path])
    return q_forward(net, coords) + action_mask(graph, path[-1])


def greedy_action(net: QNetwork, graph: SpatialGraph, path: list[int]) -> int:
    """Masked argmax action; ties break toward the lowest vertex id."""
    q = masked_q(net, graph, path)
    return graph.ids[int(np.argmax(q))]


# ---- prioritized replay ----


class ReplayBuffer:
    """Proportional prioritized replay over a binary sum tree.

    New experience enters at the current maximum priority; sampling is
    stratified over equal probability segments; importance weights are
    normalized by the largest weight in the buffer.  Eviction is oldest-first.
    """

    def __init__(self, capacity: int, alpha: float = 0.6):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = int(capacity)
        self.alpha = alpha
        tree_size = 1
        while tree_size < self.capacity:
            tree_size *= 2
        self._tree_size = tree_size
        self._sum = np.zeros(2 * tree_size)
        self._min = np.full(2 * tree_size, np.inf)
        self._data: list[Transition | None] = [None] * self.capacity
        self._write = 0
        self._size = 0
        self.max_priority = 1.0

    def __len__(self) -> int:
        return self._size

    def _set(self, idx: int, value: float) -> None:
        i = idx + self._tree_size
        self._sum[i] = value
        self._min[i] = value
        i //= 2
        while i >= 1:
            self._sum[i] = self._sum[2 * i] + self._sum[2 * i + 1]
            self._min[i] = min(self._min[2 * i], self._min[2 * i + 1])
            i //= 2

    def push(self, transition: Transition) -> None:
        self._data[self._write] = transition
        self._set(self._write, self.max_priority**self.alpha)
        self._write = (self._write + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def _find(self, mass: float) -> int:
        i = 1
        while i < self._tree_size:
            left = 2 * i
            if self._sum[left] >= mass:
                i = left
            else:
                mass -= self._sum[left]
                i = left + 1
        return min(i - self._tree_size, self._size - 1)

    def sample(self, batch_size: int, beta: float, rng: np.random.Generator):
        """Returns (transitions, tree indices, importance weights)."""
        if self._size == 0:
            raise ValueError("cannot sample from an empty buffer")
        total = self._sum[1]
        seg = total / batch_size
        idx = np.empty(batch_size, dtype=int)
        for k in range(batch_size):
            idx[k] = self._find(seg * k + rng.random() * seg)
        probs = self._sum[idx + self._tree_size] / total
        weights = (self._size * probs) ** (-beta)
        p_min = self._min[1] / total
        max_weight = (self._size * p_min) ** (-beta)
        weights = weights / max_weight
        return [self._data[i] for i in idx], idx, weights

    def update_priorities(self, indices: np.ndarray, priorities: np.ndarray) -> None:
        for i, p in zip(indices, priorities):
            if not (p > 0):
                raise ValueError(f"priorities must be positive, got {p}")
            self.max_priority = max(self.max_priority, float(p))
            self._set(int(i), float(p) ** self.alpha)


# ---- optimization ----


class AdamState:
    """Adam with bias correction; the gradient-descent step used throughout."""

    def __init__(self, params: dict[str, np.ndarray], beta1=0.9, beta2=0.999, eps=1e-8):
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0

    def apply(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float):
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for k in params:
            self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * grads[k]
            self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * grads[k] ** 2
            params[k] -= lr * (self.m[k] / b1c) / (np.sqrt(self.v[k] / b2c) + self.eps)


def clip_gradients(grads: dict[str, np.ndarray], max_norm: float) -> float:
    """Scale gradients in place to a global norm of at most ``max_norm``."""
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > max_norm > 0:
        f = max_norm / total
        for g in grads.values():
            g *= f
    return total


# ---- temporal-difference update ----


def _coords_of(graph: SpatialGraph, path: tuple[int, ...], cache: dict) -> np.ndarray:
    got = cache.get(path)
    if got is None:
        got = np.asarray([graph.position(v) for v in path])
        cache[path] = got
    return got


def td_loss_and_grads(
    net: QNetwork,
    target_net: QNetwork,
    graph: SpatialGraph,
    batch: list[Transition],
    weights: np.ndarray,
    gamma: float,
    coord_cache: dict | None = None,
):
    """Weighted squared TD error and its gradients via BPTT.

    Targets are double-Q: the online network's masked argmax at the next
    state, priced by the target network.  Returns (loss, grads, td_errors).
    """
    cache = coord_cache if coord_cache is not None else {}
    B = len(batch)
    a_idx = np.array([graph.index_of(t.action) for t in batch])
    ys = np.array([t.reward for t in batch])
    live = [k for k, t in enumerate(batch) if not t.is_done]
    if live:
        next_seqs = [_coords_of(graph, batch[k].next_state, cache) for k in live]
        q_next_online, _ = net.forward_batch(next_seqs)
        q_next_target, _ = target_net.forward_batch(next_seqs)
        masks = np.stack([action_mask(graph, batch[k].next_state[-1]) for k in live])
        a_star = np.argmax(q_next_online + masks, axis=1)
        ys[live] += gamma * q_next_target[np.arange(len(live)), a_star]
    state_seqs = [_coords_of(graph, t.state, cache) for t in batch]
    Q, fwd = net.forward_batch(state_seqs, need_cache=True)
    q_sa = Q[np.arange(B), a_idx]
    errors = q_sa - ys
    loss = float(np.sum(weights * errors**2))
    dQ = np.zeros_like(Q)
    dQ[np.arange(B), a_idx] = 2.0 * weights * errors
    grads = net.backward_batch(fwd, dQ)
    return loss, grads, errors


def td_update(
    net: QNetwork,
    target_net: QNetwork,
    graph: SpatialGraph,
    batch: list[Transition],
    weights: np.ndarray,
    gamma: float,
    lr: float,
    adam: AdamState | None = None,
    grad_clip: float = 1.0,
    coord_cache: dict | None = None,
) -> np.ndarray:
    """One gradient step on the weighted TD loss; returns per-sample errors."""
    loss, grads, errors = td_loss_and_grads(
        net, target_net, graph, batch, weights, gamma, coord_cache
    )
    if not math.isfinite(loss):
        raise NumericalError(f"TD loss diverged to {loss}")
    clip_gradients(grads, grad_clip)
    if adam is None:
        for k in net.params:
            net.params[k] -= lr * grads[k]
    else:
        adam.apply(net.params, grads, lr)
    return errors


# ---- training ----


@dataclass(frozen=True)
class TrainingConfig:
    """Knobs for the Q-learning loop; defaults follow the reference setup."""

    episodes: int = 5000
    epoch_size: int = 50
    eps_start: float = 0.9
    eps_end: float = 0.1
    eps_decay_epochs: int = 50
    gamma: float = 1.0
    learning_rate: float = 1e-3
    batch_size: int = 32
    buffer_capacity: int = 100_000
    per_alpha: float = 0.6
    per_beta_start: float = 0.4
    per_beta_end: float = 1.0
    target_sync_every: int = 100
    search_interval: int = 10
    hidden_size: int = 64
    grad_clip: float = 1.0
    exploration: str = "constrained"  # or "naive"
    restrict_greedy_to_valid: bool = True
    seed: int = 0

    def epsilon_at(self, episode: int) -> float:
        horizon = max(self.eps_decay_epochs * self.epoch_size, 1)
        frac = min(episode / horizon, 1.0)
        return self.eps_start + (self.eps_end - self.eps_start) * frac

    def beta_at(self, episode: int) -> float:
        frac = min(episode / max(self.episodes - 1, 1), 1.0)
        return self.per_beta_start + (self.per_beta_end - self.per_beta_start) * frac


@dataclass(frozen=True)
class RolloutResult:
    path: list[int]
    value: float
    valid: bool


@dataclass
class TrainResult:
    """Everything the harness needs: the best walk, traces, and the network."""

    best_path: list[int] | None
    best_value: float
    initial_value: float
    epoch_mean_rewards: list[float]
    best_trace: list[float]
    episode_rewards: list[float]
    valid_episodes: list[bool]
    n_episodes: int
    n_penalized: int
    wall_time_s: float
    net: QNetwork = field(repr=False)


def greedy_rollout(
    net: QNetwork, instance: ProblemInstance, restrict_to_valid: bool = False
) -> RolloutResult:
    """Follow the masked argmax policy from reset; no exploration.

    The rollout is invalid if it triggers the penalty branch or hits the step
    cap before reaching the goal.
    """
    state = reset(instance)
    for _ in range(instance.step_cap):
        if state.done:
            break
        a = _pick_greedy(net, instance, state, restrict_to_valid)
        if a is None:
            break
        step(instance, state, a)
    valid = state.done and state.path[-1] == instance.v_t
    return RolloutResult(list(state.path), state.mi_value, valid)


def _pick_greedy(
    net: QNetwork,
    instance: ProblemInstance,
    state: EpisodeState,
    restrict_to_valid: bool,
) -> int | None:
    g = instance.graph
    q = masked_q(net, g, state.path)
    if not restrict_to_valid:
        return g.ids[int(np.argmax(q))]
    valid = valid_actions(instance, state)
    if not valid:
        return None
    idx = [g.index_of(v) for v in valid]
    return valid[int(np.argmax(q[idx]))]


def train(
    instance: ProblemInstance,
    config: TrainingConfig,
    initial_net: QNetwork | None = None,
) -> TrainResult:
    """Q-learning per the reference recipe: epsilon-greedy episodes feeding a
    prioritized buffer, one double-Q gradient step per environment step, a
    target sync every ``target_sync_every`` updates, and a greedy search
    rollout every ``search_interval`` episodes.  The best walk ever seen
    (from exploration episodes or rollouts) is tracked throughout.

    Pass ``initial_net`` to fine-tune an existing network (it is copied, not
    mutated); it must have been built for a graph with the same vertex count.
    """
    t0 = time.perf_counter()
    if config.exploration not in ("constrained", "naive"):
        raise ValueError(f"unknown exploration mode {config.exploration!r}")
    rng = np.random.default_rng(config.seed)
    g = instance.graph
    if initial_net is not None:
        if initial_net.n_vertices != g.n_vertices:
            raise ValueError(
                f"network was built for {initial_net.n_vertices} vertices, "
                f"the instance has {g.n_vertices}"
            )
        net = initial_net.copy()
    else:
        net = QNetwork.from_graph(g, config.hidden_size, seed=config.seed)
    target_net = net.copy()
    adam = AdamState(net.params)
    buffer = ReplayBuffer(config.buffer_capacity, config.per_alpha)
    coord_cache: dict = {}

    best_path: list[int] | None = None
    best_value = -math.inf
    initial_value = 0.0
    episode_rewards: list[float] = []
    valid_flags: list[bool] = []
    best_trace: list[float] = []
    n_penalized = 0
    update_count = 0

    for ep in range(config.episodes):
        epsilon = config.epsilon_at(ep)
        beta = config.beta_at(ep)
        state = reset(instance)
        initial_value = state.initial_value
        ep_reward_sum = 0.0
        penalized = False
        for _ in range(instance.step_cap):
            if state.done:
                break
            if rng.random() < epsilon:
                if config.exploration == "naive":
                    a = naive_action(instance, state, rng)
                else:
                    if not valid_actions(instance, state):
                        break  # degenerate tour budget: nowhere to go
                    a = explore_action(instance, state, rng)
            else:
                a = _pick_greedy(net, instance, state, config.restrict_greedy_to_valid)
                if a is None:
                    break
            t = step(instance, state, a)
            ep_reward_sum += t.reward
            buffer.push(t)
            if len(buffer) >= config.batch_size:
                batch, idx, w = buffer.sample(config.batch_size, beta, rng)
                errors = td_update(
                    net,
                    target_net,
                    g,
                    batch,
                    w,
                    config.gamma,
                    config.learning_rate,
                    adam,
                    config.grad_clip,
                    coord_cache,
                )
                buffer.update_priorities(idx, np.abs(errors) + PRIORITY_EPS)
                update_count += 1
                if update_count % config.target_sync_every == 0:
                    target_net = net.copy()
            if t.is_done and t.next_state == t.state:
                penalized = True  # budget violation: path unchanged, episode over

        valid = state.done and not penalized and state.path[-1] == instance.v_t
        if valid and state.mi_value > best_value:
            best_value = state.mi_value
            best_path = list(state.path)
        if penalized:
            n_penalized += 1
        episode_rewards.append(state.initial_value + ep_reward_sum)
        valid_flags.append(valid)

        if (ep + 1) % config.search_interval == 0:
            rollout = greedy_rollout(net, instance)
            if rollout.valid and rollout.value > best_value:
                best_value = rollout.value
                best_path = rollout.path
        best_trace.append(best_value if best_path is not None else initial_value)

    epoch_means = [
        float(np.mean(episode_rewards[i : i + config.epoch_size]))
        for i in range(0, len(episode_rewards), config.epoch_size)
    ]
    return TrainResult(
        best_path=best_path,
        best_value=best_value if best_path is not None else initial_value,
        initial_value=initial_value,
        epoch_mean_rewards=epoch_means,
        best_trace=best_trace,
        episode_rewards=episode_rewards,
        valid_episodes=valid_flags,
        n_episodes=config.episodes,
        n_penalized=n_penalized,
        wall_time_s=time.perf_counter() - t0,
        net=net,
    )


# ---- checkpoints ----

CHECKPOINT_VERSION = 1


def save_checkpoint(net: QNetwork, meta: dict | None = None) -> bytes:
    """Serialize a network and instance metadata to versioned npz bytes.

    Layout (all float arrays are 64-bit): ``version``, the five parameter
    arrays ``Wx, Wh, b, Wy, by``, ``norm_offset``, ``norm_scale``, and a JSON
    string ``meta`` describing the originating instance.
    """
    buf = io.BytesIO()
    np.savez(
        buf,
        version=np.array([CHECKPOINT_VERSION]),
        meta=np.array([json.dumps(meta or {})]),
        norm_offset=net.norm_offset,
        norm_scale=net.norm_scale,
        **net.params,
    )
    return buf.getvalue()


def load_checkpoint(blob: bytes) -> tuple[QNetwork, dict]:
    """Inverse of :func:`save_checkpoint`; round-trips weights bitwise."""
    try:
        with np.load(io.BytesIO(blob), allow_pickle=False) as z:
            version = int(z["version"][0])
            if version != CHECKPOINT_VERSION:
                raise CheckpointError(f"unsupported checkpoint version {version}")
            needed = ["Wx", "Wh", "b", "Wy", "by", "norm_offset", "norm_scale", "meta"]
            missing = [k for k in needed if k not in z.files]
            if missing:
                raise CheckpointError(f"checkpoint is missing arrays: {missing}")
            params = {k: z[k] for k in ("Wx", "Wh", "b", "Wy", "by")}
            H = params["Wh"].shape[0]
            n = params["Wy"].shape[1] if params["Wy"].ndim == 2 else -1
            ok = (
                params["Wx"].shape == (2, 4 * H)
                and params["Wh"].shape == (H, 4 * H)
                and params["b"].shape == (4 * H,)
                and params["Wy"].shape == (H, n)
                and params["by"].shape == (n,)
            )
            if not ok:
                raise CheckpointError("checkpoint weight shapes are inconsistent")
            net = QNetwork.__new__(QNetwork)
            net.hidden_size = H
            net.n_vertices = params["Wy"].shape[1]
            net.norm_offset = z["norm_offset"].astype(float)
            net.norm_scale = z["norm_scale"].astype(float)
            net.params = {k: v.astype(np.float64) for k, v in params.items()}
            meta = json.loads(str(z["meta"][0]))
            return net, meta
    except CheckpointError:
        raise
    except Exception as e:
        raise CheckpointError(f"cannot read checkpoint: {e}") from e
