"""Convolutional autoencoder trained with hand-derived backpropagation.

The network compresses a flattened planar trajectory (50 steps x 2
coordinates) into a low-dimensional latent code:

encoder: conv1d (stride 2, same padding, tanh) -> dense (tanh) -> dense
(linear latent); decoder: dense (tanh) -> transposed conv1d (stride 2,
tanh) -> dense (linear output).

Everything is plain numpy: forward pass, gradients, and the Adam update
live in this module so they can be verified against finite differences.
Inputs are standardized per dimension with statistics of the training
split; reported reconstruction errors are half mean squared error in the
standardized space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .validation import check_fitted, check_matrix

_STD_FLOOR = 1e-8


@dataclass(frozen=True)
class NetworkSpec:
    """Static shape information of the autoencoder."""

    steps: int = 50
    channels: int = 2
    conv_maps: int = 2
    kernel: int = 5
    stride: int = 2
    hidden: int = 5
    latent: int = 2

    def __post_init__(self):
        if min(self.steps, self.channels, self.conv_maps, self.kernel,
               self.stride, self.hidden, self.latent) < 1:
            raise ValueError("all network dimensions must be positive")

    @property
    def input_dim(self):
        return self.steps * self.channels

    @property
    def conv_out(self):
        # Same-padded strided convolution output length.
        return -(-self.steps // self.stride)

    @property
    def pad_left(self):
        total = max((self.conv_out - 1) * self.stride + self.kernel - self.steps, 0)
        return total // 2

    @property
    def pad_right(self):
        total = max((self.conv_out - 1) * self.stride + self.kernel - self.steps, 0)
        return total - total // 2

    @property
    def conv_flat(self):
        return self.conv_out * self.conv_maps

    @property
    def up_len(self):
        # The transposed convolution mirrors the strided conv: length
        # grows by the stride factor, then the same-padding crop applies.
        return self.hidden * self.stride

    @property
    def up_flat(self):
        return self.up_len * self.conv_maps


def init_network(rng, spec=NetworkSpec()):
    """Glorot-uniform weights, zero biases; draw order is fixed."""

    def glorot(shape, fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, shape)

    s = spec
    params = {
        "conv_w": glorot((s.kernel, s.channels, s.conv_maps),
                         s.kernel * s.channels, s.kernel * s.conv_maps),
        "conv_b": np.zeros(s.conv_maps),
        "enc1_w": glorot((s.conv_flat, s.hidden), s.conv_flat, s.hidden),
        "enc1_b": np.zeros(s.hidden),
        "enc2_w": glorot((s.hidden, s.latent), s.hidden, s.latent),
        "enc2_b": np.zeros(s.latent),
        "dec1_w": glorot((s.latent, s.hidden), s.latent, s.hidden),
        "dec1_b": np.zeros(s.hidden),
        "tconv_w": glorot((s.kernel, s.conv_maps), s.kernel, s.kernel * s.conv_maps),
        "tconv_b": np.zeros(s.conv_maps),
        "out_w": glorot((s.up_flat, s.input_dim), s.up_flat, s.input_dim),
        "out_b": np.zeros(s.input_dim),
    }
    return params


def parameter_count(spec=NetworkSpec()):
    return sum(p.size for p in init_network(np.random.default_rng(0), spec).values())


def _conv_windows(x3, spec):
    padded = np.pad(x3, ((0, 0), (spec.pad_left, spec.pad_right), (0, 0)))
    idx = spec.stride * np.arange(spec.conv_out)[:, None] + np.arange(spec.kernel)
    return padded[:, idx, :]


def _tconv_taps(spec):
    """Output positions written by each kernel tap, after the same crop."""
    taps = []
    base = spec.stride * np.arange(spec.hidden)
    for q in range(spec.kernel):
        u = base + q - spec.pad_left
        keep = (u >= 0) & (u < spec.up_len)
        taps.append((u[keep], keep))
    return taps


def network_forward(params, x, spec=NetworkSpec()):
    """Forward pass on standardized inputs.

    Returns (latent, reconstruction, cache); the cache carries the
    activations needed by the backward pass.
    """
    x = np.asarray(x, dtype=np.float64)
    batch = x.shape[0]
    x3 = x.reshape(batch, spec.steps, spec.channels)
    win = _conv_windows(x3, spec)
    conv_act = np.tanh(np.einsum("boqc,qcm->bom", win, params["conv_w"])
                       + params["conv_b"])
    flat = conv_act.reshape(batch, spec.conv_flat)
    hid = np.tanh(flat @ params["enc1_w"] + params["enc1_b"])
    latent = hid @ params["enc2_w"] + params["enc2_b"]
    dec = np.tanh(latent @ params["dec1_w"] + params["dec1_b"])
    up_pre = np.zeros((batch, spec.up_len, spec.conv_maps))
    taps = _tconv_taps(spec)
    for q in range(spec.kernel):
        u, keep = taps[q]
        up_pre[:, u, :] += dec[:, keep, None] * params["tconv_w"][q][None, None, :]
    up_act = np.tanh(up_pre + params["tconv_b"])
    up_flat = up_act.reshape(batch, spec.up_flat)
    recon = up_flat @ params["out_w"] + params["out_b"]
    cache = (win, conv_act, flat, hid, latent, dec, up_act, up_flat)
    return latent, recon, cache


def decode_latent(params, latent, spec=NetworkSpec()):
    """Decoder half only: latent codes to standardized reconstructions."""
    latent = np.asarray(latent, dtype=np.float64)
    batch = latent.shape[0]
    dec = np.tanh(latent @ params["dec1_w"] + params["dec1_b"])
    up_pre = np.zeros((batch, spec.up_len, spec.conv_maps))
    for q, (u, keep) in enumerate(_tconv_taps(spec)):
        up_pre[:, u, :] += dec[:, keep, None] * params["tconv_w"][q][None, None, :]
    up_act = np.tanh(up_pre + params["tconv_b"])
    return up_act.reshape(batch, spec.up_flat) @ params["out_w"] + params["out_b"]


def network_loss(params, x, spec=NetworkSpec()):
    """Half mean squared reconstruction error over the batch."""
    _, recon, _ = network_forward(params, x, spec)
    resid = recon - np.asarray(x, dtype=np.float64)
    return 0.5 * float((resid * resid).sum()) / x.shape[0]


def network_gradients(params, x, spec=NetworkSpec()):
    """Loss and exact parameter gradients for one standardized batch."""
    x = np.asarray(x, dtype=np.float64)
    batch = x.shape[0]
    _, recon, cache = network_forward(params, x, spec)
    win, conv_act, flat, hid, latent, dec, up_act, up_flat = cache
    resid = recon - x
    loss = 0.5 * float((resid * resid).sum()) / batch
    d_recon = resid / batch
    grads = {}
    grads["out_w"] = up_flat.T @ d_recon
    grads["out_b"] = d_recon.sum(axis=0)
    d_up_act = (d_recon @ params["out_w"].T).reshape(batch, spec.up_len, spec.conv_maps)
    d_up_pre = d_up_act * (1.0 - up_act * up_act)
    grads["tconv_b"] = d_up_pre.sum(axis=(0, 1))
    grads["tconv_w"] = np.zeros_like(params["tconv_w"])
    d_dec = np.zeros_like(dec)
    for q, (u, keep) in enumerate(_tconv_taps(spec)):
        grads["tconv_w"][q] = np.einsum("bi,bim->m", dec[:, keep], d_up_pre[:, u, :])
        d_dec[:, keep] += np.einsum("bim,m->bi", d_up_pre[:, u, :], params["tconv_w"][q])
    d_dec_pre = d_dec * (1.0 - dec * dec)
    grads["dec1_w"] = latent.T @ d_dec_pre
    grads["dec1_b"] = d_dec_pre.sum(axis=0)
    d_latent = d_dec_pre @ params["dec1_w"].T
    grads["enc2_w"] = hid.T @ d_latent
    grads["enc2_b"] = d_latent.sum(axis=0)
    d_hid = d_latent @ params["enc2_w"].T
    d_hid_pre = d_hid * (1.0 - hid * hid)
    grads["enc1_w"] = flat.T @ d_hid_pre
    grads["enc1_b"] = d_hid_pre.sum(axis=0)
    d_flat = d_hid_pre @ params["enc1_w"].T
    d_conv_pre = d_flat.reshape(batch, spec.conv_out, spec.conv_maps)
    d_conv_pre = d_conv_pre * (1.0 - conv_act * conv_act)
    grads["conv_w"] = np.einsum("boqc,bom->qcm", win, d_conv_pre)
    grads["conv_b"] = d_conv_pre.sum(axis=(0, 1))
    return loss, grads


def adam_step(params, grads, moment1, moment2, step, learning_rate,
              beta1=0.9, beta2=0.999, eps=1e-8):
    """In-place Adam update with bias correction; step counts from 1."""
    for key, grad in grads.items():
        moment1[key] = beta1 * moment1[key] + (1.0 - beta1) * grad
        moment2[key] = beta2 * moment2[key] + (1.0 - beta2) * grad * grad
        m_hat = moment1[key] / (1.0 - beta1 ** step)
        v_hat = moment2[key] / (1.0 - beta2 ** step)
        params[key] -= learning_rate * m_hat / (np.sqrt(v_hat) + eps)


@dataclass(frozen=True)
class TrainReport:
    """Outcome of one training repeat."""

    repeat_index: int
    split_seed: int
    epochs_run: int
    final_train_error: float
    final_validation_error: float


class ConvAutoencoder(TransformerMixin, BaseEstimator):
    """Trajectory autoencoder with restarts and windowed early stopping.

    ``fit`` runs ``n_repeats`` independent trainings, each on a fresh
    train/validation split, and keeps the weights with the lowest final
    validation error. Early stopping compares consecutive non-overlapping
    windows of per-epoch validation error and halts when the mean stops
    improving.
    """

    min_fit_rows = 8

    def __init__(self, latent_dim=2, conv_maps=2, kernel_size=5, stride=2,
                 hidden_units=5, learning_rate=1e-3, beta1=0.9, beta2=0.999,
                 minibatch_size=32, max_epochs=20000, early_stop_window=500,
                 n_repeats=5, val_fraction=0.25, warm_start=False,
                 random_state=None):
        self.latent_dim = latent_dim
        self.conv_maps = conv_maps
        self.kernel_size = kernel_size
        self.stride = stride
        self.hidden_units = hidden_units
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.minibatch_size = minibatch_size
        self.max_epochs = max_epochs
        self.early_stop_window = early_stop_window
        self.n_repeats = n_repeats
        self.val_fraction = val_fraction
        self.warm_start = warm_start
        self.random_state = random_state

    def _spec_for(self, n_features):
        if n_features % 2 != 0:
            raise ValueError("input dimension must be even (x, y pairs)")
        return NetworkSpec(steps=n_features // 2, channels=2,
                           conv_maps=self.conv_maps, kernel=self.kernel_size,
                           stride=self.stride, hidden=self.hidden_units,
                           latent=self.latent_dim)

    def fit(self, X, y=None):
        X = check_matrix(X, min_rows=self.min_fit_rows, name="X")
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must lie in (0, 1)")
        spec = self._spec_for(X.shape[1])
        rng = np.random.default_rng(self.random_state)
        warm = None
        if self.warm_start and getattr(self, "params_", None) is not None:
            warm = {k: v.copy() for k, v in self.params_.items()}
        candidates = []
        reports = []
        for rep in range(self.n_repeats):
            split_seed = int(rng.integers(2 ** 31))
            report, params, mean, std = self._train_once(X, spec, rep, split_seed, warm)
            reports.append(report)
            candidates.append((report.final_validation_error, rep, params, mean, std))
        best = min(candidates, key=lambda c: (c[0], c[1]))
        self.network_spec_ = spec
        self.params_ = best[2]
        self.norm_mean_ = best[3]
        self.norm_std_ = best[4]
        self.reports_ = reports
        self.best_repeat_ = best[1]
        self.n_features_in_ = X.shape[1]
        return self

    def _train_once(self, X, spec, repeat_index, split_seed, warm):
        srng = np.random.default_rng(split_seed)
        n = X.shape[0]
        n_val = int(np.floor(self.val_fraction * n))
        perm = srng.permutation(n)
        val_idx, train_idx = perm[:n_val], perm[n_val:]
        x_train = X[train_idx]
        mean = x_train.mean(axis=0)
        std = np.maximum(x_train.std(axis=0), _STD_FLOOR)
        x_train = (x_train - mean) / std
        x_val = (X[val_idx] - mean) / std
        params = ({k: v.copy() for k, v in warm.items()} if warm is not None
                  else init_network(srng, spec))
        moment1 = {k: np.zeros_like(v) for k, v in params.items()}
        moment2 = {k: np.zeros_like(v) for k, v in params.items()}
        step = 0
        n_train = x_train.shape[0]
        batch = max(1, min(self.minibatch_size, n_train))
        window = self.early_stop_window
        val_errors = []
        prev_window_mean = None
        epochs_run = 0
        for epoch in range(1, self.max_epochs + 1):
            order = srng.permutation(n_train)
            for start in range(0, n_train, batch):
                chunk = order[start:start + batch]
                _, grads = network_gradients(params, x_train[chunk], spec)
                step += 1
                adam_step(params, grads, moment1, moment2, step,
                          self.learning_rate, self.beta1, self.beta2)
            val_errors.append(network_loss(params, x_val, spec))
            epochs_run = epoch
            if window and epoch % window == 0:
                current = float(np.mean(val_errors[-window:]))
                if prev_window_mean is not None and current > prev_window_mean:
                    break
                prev_window_mean = current
        report = TrainReport(
            repeat_index=repeat_index,
            split_seed=split_seed,
            epochs_run=epochs_run,
            final_train_error=network_loss(params, x_train, spec),
            final_validation_error=val_errors[-1],
        )
        return report, params, mean, std

    def _standardize(self, X):
        return (X - self.norm_mean_) / self.norm_std_

    def transform(self, X):
        check_fitted(self, ["params_", "norm_mean_", "norm_std_"])
        X = check_matrix(X, n_cols=self.n_features_in_, name="X")
        latent, _, _ = network_forward(self.params_, self._standardize(X),
                                       self.network_spec_)
        return latent

    def inverse_transform(self, Z):
        check_fitted(self, ["params_", "norm_mean_", "norm_std_"])
        Z = check_matrix(Z, n_cols=self.latent_dim, name="Z")
        recon = decode_latent(self.params_, Z, self.network_spec_)
        return recon * self.norm_std_ + self.norm_mean_

    def reconstruct(self, X):
        """Encode and decode X, returned in original (unstandardized) units."""
        check_fitted(self, ["params_", "norm_mean_", "norm_std_"])
        X = check_matrix(X, n_cols=self.n_features_in_, name="X")
        _, recon, _ = network_forward(self.params_, self._standardize(X),
                                      self.network_spec_)
        return recon * self.norm_std_ + self.norm_mean_
