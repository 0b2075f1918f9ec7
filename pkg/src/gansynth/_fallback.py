"""Pure numpy implementations of the hot kernels.

Signatures and semantics match the compiled ``_ckernels`` module; the split
search reproduces its arithmetic exactly so both backends grow identical trees.
"""

import numpy as np
from scipy.special import expit


def adam_update(params, grads, m, v, lr_t, beta1, beta2, eps_t):
    n = params.shape[0]
    if grads.shape[0] != n or m.shape[0] != n or v.shape[0] != n:
        raise ValueError("adam buffers must share the parameter length")
    if not np.isfinite(grads).all():
        return False
    dtype = params.dtype.type
    m *= dtype(beta1)
    m += dtype(1 - beta1) * grads
    v *= dtype(beta2)
    v += dtype(1 - beta2) * (grads * grads)
    denom = np.sqrt(v)
    denom += dtype(eps_t)
    params -= dtype(lr_t) * m / denom
    return True


def leaky_forward(z, slope):
    return np.where(z > 0, z, z * z.dtype.type(slope))


def leaky_dropout_forward(z, uniforms, slope, rate):
    if uniforms.shape != z.shape:
        raise ValueError("uniform draws must match the activation shape")
    dtype = z.dtype.type
    keep = dtype(1) / (dtype(1) - dtype(rate))
    mask = np.where(uniforms >= dtype(rate), keep, dtype(0))
    return np.where(z > 0, z, z * dtype(slope)) * mask, mask


def leaky_backward(grad, z, mask, slope):
    dtype = z.dtype.type
    local = np.where(z > 0, dtype(1), dtype(slope))
    if mask is not None:
        return grad * mask * local
    return grad * local


def sigmoid(z):
    return expit(z)


def best_gini_cut_sorted(values, labels):
    n = values.shape[0]
    if labels.shape[0] != n:
        raise ValueError("values and labels differ in length")
    if n < 2:
        return -1, np.inf
    pos_left = np.cumsum(labels[:-1], dtype=np.int64)
    total_pos = int(labels.sum(dtype=np.int64))
    valid = values[:-1] < values[1:]
    if not valid.any():
        return -1, np.inf
    k = np.nonzero(valid)[0]
    n_l = (k + 1).astype(np.float64)
    n_r = float(n) - n_l
    p_l = pos_left[k].astype(np.float64)
    p_r = (total_pos - pos_left[k]).astype(np.float64)
    imp = (2.0 * p_l * (n_l - p_l) / n_l + 2.0 * p_r * (n_r - p_r) / n_r) / float(n)
    best = int(np.argmin(imp))
    return int(k[best]), float(imp[best])


def nearest_sq_distances(a, b, max_block_elements=1 << 20):
    if a.shape[1] != b.shape[1]:
        raise ValueError("row widths differ")
    if b.shape[0] == 0:
        raise ValueError("reference set is empty")
    out = np.empty(a.shape[0], dtype=np.float64)
    arg = np.empty(a.shape[0], dtype=np.intp)
    per_block = max(1, max_block_elements // max(1, b.shape[0] * a.shape[1]))
    for start in range(0, a.shape[0], per_block):
        chunk = a[start:start + per_block]
        diff = chunk[:, None, :] - b[None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff)
        idx = np.argmin(sq, axis=1)
        arg[start:start + per_block] = idx
        out[start:start + per_block] = sq[np.arange(chunk.shape[0]), idx]
    return out, arg
