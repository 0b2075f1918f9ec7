# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled kernels. Same signatures and semantics as ``gansynth._fallback``."""

import numpy as np

cdef extern from "_ckernels.h" nogil:
    int adam_update_f32(float*, const float*, float*, float*, Py_ssize_t,
                        float, float, float, float)
    int adam_update_f64(double*, const double*, double*, double*, Py_ssize_t,
                        double, double, double, double)
    void leaky_forward_f32(const float*, float*, Py_ssize_t, float)
    void leaky_forward_f64(const double*, double*, Py_ssize_t, double)
    void leaky_dropout_forward_f32(const float*, const float*, float*, float*,
                                   Py_ssize_t, float, float)
    void leaky_dropout_forward_f64(const double*, const double*, double*, double*,
                                   Py_ssize_t, double, double)
    void leaky_backward_f32(const float*, const float*, const float*, float*,
                            Py_ssize_t, float)
    void leaky_backward_f64(const double*, const double*, const double*, double*,
                            Py_ssize_t, double)
    void sigmoid_f32(const float*, float*, Py_ssize_t)
    void sigmoid_f64(const double*, double*, Py_ssize_t)
    Py_ssize_t best_gini_cut(const double*, const unsigned char*, Py_ssize_t, double*)
    void min_sq_distances(const double*, const double*, Py_ssize_t, Py_ssize_t,
                          Py_ssize_t, double*, Py_ssize_t*)

ctypedef fused real:
    float
    double


def adam_update(real[::1] params, real[::1] grads, real[::1] m, real[::1] v,
                double lr_t, double beta1, double beta2, double eps_t):
    cdef Py_ssize_t n = params.shape[0]
    if grads.shape[0] != n or m.shape[0] != n or v.shape[0] != n:
        raise ValueError("adam buffers must share the parameter length")
    if n == 0:
        return True
    cdef int ok
    if real is float:
        with nogil:
            ok = adam_update_f32(&params[0], &grads[0], &m[0], &v[0], n,
                                 <float>lr_t, <float>beta1, <float>beta2, <float>eps_t)
    else:
        with nogil:
            ok = adam_update_f64(&params[0], &grads[0], &m[0], &v[0], n,
                                 lr_t, beta1, beta2, eps_t)
    return bool(ok)


def leaky_forward(real[:, ::1] z, double slope):
    dtype = np.float32 if real is float else np.float64
    out = np.empty((z.shape[0], z.shape[1]), dtype=dtype)
    cdef real[:, ::1] o = out
    cdef Py_ssize_t n = z.shape[0] * z.shape[1]
    if n == 0:
        return out
    if real is float:
        leaky_forward_f32(&z[0, 0], &o[0, 0], n, <float>slope)
    else:
        leaky_forward_f64(&z[0, 0], &o[0, 0], n, slope)
    return out


def leaky_dropout_forward(real[:, ::1] z, real[:, ::1] uniforms, double slope, double rate):
    shape = (z.shape[0], z.shape[1])
    dtype = np.float32 if real is float else np.float64
    out = np.empty(shape, dtype=dtype)
    mask = np.empty(shape, dtype=dtype)
    cdef real[:, ::1] o = out
    cdef real[:, ::1] mk = mask
    cdef Py_ssize_t n = z.shape[0] * z.shape[1]
    if uniforms.shape[0] != z.shape[0] or uniforms.shape[1] != z.shape[1]:
        raise ValueError("uniform draws must match the activation shape")
    if n == 0:
        return out, mask
    if real is float:
        leaky_dropout_forward_f32(&z[0, 0], &uniforms[0, 0], &o[0, 0], &mk[0, 0], n,
                                  <float>slope, <float>rate)
    else:
        leaky_dropout_forward_f64(&z[0, 0], &uniforms[0, 0], &o[0, 0], &mk[0, 0], n,
                                  slope, rate)
    return out, mask


def leaky_backward(real[:, ::1] grad, real[:, ::1] z, mask, double slope):
    shape = (z.shape[0], z.shape[1])
    dtype = np.float32 if real is float else np.float64
    out = np.empty(shape, dtype=dtype)
    cdef real[:, ::1] o = out
    cdef real[:, ::1] mk
    cdef Py_ssize_t n = z.shape[0] * z.shape[1]
    if n == 0:
        return out
    if mask is None:
        if real is float:
            leaky_backward_f32(&grad[0, 0], &z[0, 0], NULL, &o[0, 0], n, <float>slope)
        else:
            leaky_backward_f64(&grad[0, 0], &z[0, 0], NULL, &o[0, 0], n, slope)
    else:
        mk = mask
        if real is float:
            leaky_backward_f32(&grad[0, 0], &z[0, 0], &mk[0, 0], &o[0, 0], n, <float>slope)
        else:
            leaky_backward_f64(&grad[0, 0], &z[0, 0], &mk[0, 0], &o[0, 0], n, slope)
    return out


def sigmoid(real[:, ::1] z):
    dtype = np.float32 if real is float else np.float64
    out = np.empty((z.shape[0], z.shape[1]), dtype=dtype)
    cdef real[:, ::1] o = out
    cdef Py_ssize_t n = z.shape[0] * z.shape[1]
    if n == 0:
        return out
    if real is float:
        sigmoid_f32(&z[0, 0], &o[0, 0], n)
    else:
        sigmoid_f64(&z[0, 0], &o[0, 0], n)
    return out


def best_gini_cut_sorted(const double[::1] values, const unsigned char[::1] labels):
    cdef Py_ssize_t n = values.shape[0]
    if labels.shape[0] != n:
        raise ValueError("values and labels differ in length")
    cdef double best = np.inf
    cdef Py_ssize_t k = -1
    if n >= 2:
        with nogil:
            k = best_gini_cut(&values[0], &labels[0], n, &best)
    return k, best


def nearest_sq_distances(const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0], d = a.shape[1]
    if b.shape[1] != d:
        raise ValueError("row widths differ")
    if nb == 0:
        raise ValueError("reference set is empty")
    out = np.empty(na, dtype=np.float64)
    arg = np.empty(na, dtype=np.intp)
    cdef double[::1] o = out
    cdef Py_ssize_t[::1] ag = arg
    if na == 0:
        return out, arg
    if d == 0:
        out[:] = 0.0
        arg[:] = 0
        return out, arg
    with nogil:
        min_sq_distances(&a[0, 0], &b[0, 0], na, nb, d, &o[0], &ag[0])
    return out, arg
