"""Dense float64 tensors with tape-recorded reverse-mode gradients.

Every operation goes through a Tape. The tape appends one backward
closure per op in creation order, which is already topological, so
``backward`` simply replays the list in reverse and accumulates
gradients additively into ``Tensor.grad``. A non-recording tape turns
the same code paths into plain forward evaluation.
"""

import math

import numpy as np

from .rng import MT19937


class Tensor:
    """A float64 array plus its accumulated gradient."""

    __slots__ = ("data", "grad")

    def __init__(self, data):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None

    @property
    def shape(self):
        return self.data.shape

    def copy(self) -> "Tensor":
        return Tensor(self.data.copy())

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"


def _accum(t: Tensor, g):
    if t.grad is None:
        t.grad = np.array(g, dtype=np.float64, copy=True)
    else:
        t.grad += g


def _check_same_shape(op, a, b):
    if a.data.shape != b.data.shape:
        raise ValueError(f"{op}: shape mismatch {a.data.shape} vs {b.data.shape}")


class Tape:
    """Append-only record of operations; replayed in reverse for gradients."""

    def __init__(self, recording: bool = True):
        self.recording = recording
        self.nodes = []

    def _emit(self, backward_fn):
        if self.recording:
            self.nodes.append(backward_fn)

    def backward(self, loss: Tensor, params=None):
        """Accumulate d(loss)/d(tensor) into .grad for every tensor on the tape.

        Parameters listed in ``params`` that the loss never touched get
        explicit zero gradients.
        """
        if loss.data.size != 1:
            raise ValueError(f"backward needs a scalar loss, got shape {loss.data.shape}")
        if not self.recording:
            raise ValueError("backward on a non-recording tape")
        _accum(loss, np.ones_like(loss.data))
        for fn in reversed(self.nodes):
            fn()
        if params is not None:
            for p in params:
                if p.grad is None:
                    p.grad = np.zeros_like(p.data)

    # ---- primitives ------------------------------------------------------

    def matmul(self, a: Tensor, b: Tensor) -> Tensor:
        ad, bd = a.data, b.data
        if ad.ndim == 1 and bd.ndim == 2:
            if ad.shape[0] != bd.shape[0]:
                raise ValueError(f"matmul: shape mismatch {ad.shape} vs {bd.shape}")
        elif ad.ndim == 2 and bd.ndim == 1:
            if ad.shape[1] != bd.shape[0]:
                raise ValueError(f"matmul: shape mismatch {ad.shape} vs {bd.shape}")
        elif ad.ndim == 2 and bd.ndim == 2:
            if ad.shape[1] != bd.shape[0]:
                raise ValueError(f"matmul: shape mismatch {ad.shape} vs {bd.shape}")
        else:
            raise ValueError(f"matmul: unsupported ranks {ad.shape} vs {bd.shape}")
        out = Tensor(ad @ bd)

        def backward():
            g = out.grad
            if g is None:
                return
            if ad.ndim == 1 and bd.ndim == 2:
                _accum(a, bd @ g)
                _accum(b, np.outer(ad, g))
            elif ad.ndim == 2 and bd.ndim == 1:
                _accum(a, np.outer(g, bd))
                _accum(b, ad.T @ g)
            else:
                _accum(a, g @ bd.T)
                _accum(b, ad.T @ g)

        self._emit(backward)
        return out

    def add(self, a: Tensor, b: Tensor) -> Tensor:
        _check_same_shape("add", a, b)
        out = Tensor(a.data + b.data)

        def backward():
            g = out.grad
            if g is None:
                return
            _accum(a, g)
            _accum(b, g)

        self._emit(backward)
        return out

    def mul(self, a: Tensor, b: Tensor) -> Tensor:
        _check_same_shape("mul", a, b)
        ad, bd = a.data, b.data
        out = Tensor(ad * bd)

        def backward():
            g = out.grad
            if g is None:
                return
            _accum(a, g * bd)
            _accum(b, g * ad)

        self._emit(backward)
        return out

    def scale(self, a: Tensor, k: float) -> Tensor:
        out = Tensor(a.data * k)

        def backward():
            g = out.grad
            if g is None:
                return
            _accum(a, g * k)

        self._emit(backward)
        return out

    def one_minus(self, a: Tensor) -> Tensor:
        out = Tensor(1.0 - a.data)

        def backward():
            g = out.grad
            if g is None:
                return
            _accum(a, -g)

        self._emit(backward)
        return out

    def tanh(self, a: Tensor) -> Tensor:
        y = np.tanh(a.data)
        out = Tensor(y)

        def backward():
            g = out.grad
            if g is None:
                return
            _accum(a, g * (1.0 - y * y))

        self._emit(backward)
        return out

    def sigmoid(self, a: Tensor) -> Tensor:
        y = 1.0 / (1.0 + np.exp(-a.data))
        out = Tensor(y)

        def backward():
            g = out.grad
            if g is None:
                return
            _accum(a, g * y * (1.0 - y))

        self._emit(backward)
        return out

    def concat(self, a: Tensor, b: Tensor) -> Tensor:
        if a.data.ndim != 1 or b.data.ndim != 1:
            raise ValueError(f"concat: expected vectors, got {a.data.shape} and {b.data.shape}")
        out = Tensor(np.concatenate([a.data, b.data]))
        na = a.data.shape[0]

        def backward():
            g = out.grad
            if g is None:
                return
            _accum(a, g[:na])
            _accum(b, g[na:])

        self._emit(backward)
        return out

    def stack(self, rows: list[Tensor]) -> Tensor:
        if not rows:
            raise ValueError("stack: empty input")
        out = Tensor(np.stack([r.data for r in rows]))

        def backward():
            g = out.grad
            if g is None:
                return
            for i, r in enumerate(rows):
                _accum(r, g[i])

        self._emit(backward)
        return out

    def embedding_lookup(self, table: Tensor, index: int) -> Tensor:
        if not (0 <= index < table.data.shape[0]):
            raise ValueError(f"embedding_lookup: index {index} out of range for {table.data.shape}")
        out = Tensor(table.data[index].copy())

        def backward():
            g = out.grad
            if g is None:
                return
            if table.grad is None:
                table.grad = np.zeros_like(table.data)
            table.grad[index] += g

        self._emit(backward)
        return out

    def dropout(self, a: Tensor, rate: float, rng: MT19937, training: bool) -> Tensor:
        """Inverted-scaling dropout; identity when not training or rate is 0."""
        if not (0.0 <= rate < 1.0):
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        if not training or rate == 0.0:
            return a
        keep_p = 1.0 - rate
        mask = np.empty_like(a.data)
        flat = mask.reshape(-1)
        for i in range(flat.shape[0]):
            flat[i] = (1.0 / keep_p) if rng.random_float() < keep_p else 0.0
        out = Tensor(a.data * mask)

        def backward():
            g = out.grad
            if g is None:
                return
            _accum(a, g * mask)

        self._emit(backward)
        return out

    def softmax(self, a: Tensor) -> Tensor:
        """Softmax over the last axis, max-subtracted for stability."""
        z = a.data - a.data.max(axis=-1, keepdims=True)
        e = np.exp(z)
        y = e / e.sum(axis=-1, keepdims=True)
        out = Tensor(y)

        def backward():
            g = out.grad
            if g is None:
                return
            s = (g * y).sum(axis=-1, keepdims=True)
            _accum(a, y * (g - s))

        self._emit(backward)
        return out

    def log_softmax(self, a: Tensor) -> Tensor:
        z = a.data - a.data.max(axis=-1, keepdims=True)
        lse = np.log(np.exp(z).sum(axis=-1, keepdims=True))
        y = z - lse
        out = Tensor(y)
        sm = np.exp(y)

        def backward():
            g = out.grad
            if g is None:
                return
            _accum(a, g - sm * g.sum(axis=-1, keepdims=True))

        self._emit(backward)
        return out

    def sum_all(self, a: Tensor) -> Tensor:
        out = Tensor(a.data.sum())

        def backward():
            g = out.grad
            if g is None:
                return
            _accum(a, np.full_like(a.data, float(g)))

        self._emit(backward)
        return out

    def cross_entropy(self, probs: Tensor, target_id: int) -> Tensor:
        """-ln p[target] with p clamped at 1e-12 before the log."""
        p = probs.data
        if p.ndim != 1:
            raise ValueError(f"cross_entropy: expected a probability row, got shape {p.shape}")
        if not (0 <= target_id < p.shape[0]):
            raise ValueError(f"cross_entropy: target {target_id} out of range for {p.shape[0]} classes")
        clamped = max(p[target_id], 1e-12)
        out = Tensor(-math.log(clamped))

        def backward():
            g = out.grad
            if g is None:
                return
            gp = np.zeros_like(p)
            if p[target_id] > 1e-12:
                gp[target_id] = -float(g) / p[target_id]
            _accum(probs, gp)

        self._emit(backward)
        return out

    def mean_scalars(self, scalars: list[Tensor]) -> Tensor:
        if not scalars:
            raise ValueError("mean_scalars: empty input")
        total = scalars[0]
        for s in scalars[1:]:
            total = self.add(total, s)
        return self.scale(total, 1.0 / len(scalars))


class Adagrad:
    """Per-coordinate adaptive gradient descent.

    accumulator += g^2; param -= lr * g / (sqrt(accumulator) + eps).
    """

    def __init__(self, params: dict[str, Tensor], learning_rate: float = 0.15, epsilon: float = 1e-8):
        self.params = params
        self.learning_rate = learning_rate
        self.epsilon = epsilon
        self.accumulators = {name: np.zeros_like(p.data) for name, p in params.items()}

    def step(self):
        """Apply one update from the gradients currently held by the params."""
        for name, p in self.params.items():
            g = p.grad
            if g is None:
                continue
            if g.shape != p.data.shape:
                raise ValueError(f"adagrad: gradient shape {g.shape} does not match param {name} {p.data.shape}")
            acc = self.accumulators[name]
            acc += g * g
            p.data -= self.learning_rate * g / (np.sqrt(acc) + self.epsilon)

    def zero_grad(self):
        for p in self.params.values():
            p.grad = None


def init_uniform(shape, rng: MT19937, lo: float = -0.1, hi: float = 0.1) -> Tensor:
    """Parameter init: uniform(lo, hi) drawn element by element, row-major."""
    n = 1
    for d in shape:
        n *= d
    data = np.array([rng.uniform(lo, hi) for _ in range(n)], dtype=np.float64)
    return Tensor(data.reshape(shape))
