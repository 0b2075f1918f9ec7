/* Hot loops for the GAN trainer, the CART split search and the
 * nearest-neighbour scans.  Every function has a numpy twin in
 * _fallback.py; the two must agree bit-for-bit on the split search and to
 * rounding elsewhere, so FP contraction is disabled at build time. */
#ifndef GANSYNTH_CKERNELS_H
#define GANSYNTH_CKERNELS_H

#include <math.h>
#include <stddef.h>

#define GS_DEFINE_ELEMENTWISE(T, SFX, SQRT, EXP)                                   \
static int adam_update_##SFX(T *restrict p, const T *restrict g, T *restrict m,    \
                             T *restrict v, ptrdiff_t n, T lr_t, T b1, T b2,       \
                             T eps_t)                                              \
{                                                                                  \
    /* integer OR-reduction so the finiteness scan vectorises; x - x is    */ \
    /* 0 for finite x and NaN for inf/NaN                                   */ \
    int bad = 0;                                                                   \
    for (ptrdiff_t i = 0; i < n; ++i) bad |= !(g[i] - g[i] == 0);                  \
    if (bad) return 0;                                                             \
    const T c1 = 1 - b1, c2 = 1 - b2;                                              \
    for (ptrdiff_t i = 0; i < n; ++i) {                                            \
        const T gi = g[i];                                                         \
        const T mi = b1 * m[i] + c1 * gi;                                          \
        const T vi = b2 * v[i] + c2 * (gi * gi);                                   \
        m[i] = mi;                                                                 \
        v[i] = vi;                                                                 \
        p[i] -= lr_t * mi / (SQRT(vi) + eps_t);                                    \
    }                                                                              \
    return 1;                                                                      \
}                                                                                  \
                                                                                   \
static void leaky_forward_##SFX(const T *restrict z, T *restrict out, ptrdiff_t n, \
                                T slope)                                           \
{                                                                                  \
    for (ptrdiff_t i = 0; i < n; ++i) {                                            \
        const T zi = z[i];                                                         \
        out[i] = zi > 0 ? zi : slope * zi;                                         \
    }                                                                              \
}                                                                                  \
                                                                                   \
static void leaky_dropout_forward_##SFX(const T *restrict z, const T *restrict u, \
                                        T *restrict out, T *restrict mask,         \
                                        ptrdiff_t n, T slope, T rate)              \
{                                                                                  \
    const T keep = 1 / (1 - rate);                                                 \
    for (ptrdiff_t i = 0; i < n; ++i) {                                            \
        const T zi = z[i];                                                         \
        const T mi = u[i] >= rate ? keep : (T)0;                                   \
        mask[i] = mi;                                                              \
        out[i] = (zi > 0 ? zi : slope * zi) * mi;                                  \
    }                                                                              \
}                                                                                  \
                                                                                   \
static void leaky_backward_##SFX(const T *restrict g, const T *restrict z,        \
                                 const T *restrict mask, T *restrict out,          \
                                 ptrdiff_t n, T slope)                             \
{                                                                                  \
    if (mask) {                                                                    \
        for (ptrdiff_t i = 0; i < n; ++i)                                          \
            out[i] = g[i] * mask[i] * (z[i] > 0 ? (T)1 : slope);                   \
    } else {                                                                       \
        for (ptrdiff_t i = 0; i < n; ++i)                                          \
            out[i] = g[i] * (z[i] > 0 ? (T)1 : slope);                             \
    }                                                                              \
}                                                                                  \
                                                                                   \
static void sigmoid_##SFX(const T *restrict z, T *restrict out, ptrdiff_t n)       \
{                                                                                  \
    /* one exp of -|z| and a select: no data-dependent branch */                \
    for (ptrdiff_t i = 0; i < n; ++i) {                                            \
        const T zi = z[i];                                                         \
        const T e = EXP(zi >= 0 ? -zi : zi);                                       \
        const T r = 1 / (1 + e);                                                   \
        out[i] = zi >= 0 ? r : e * r;                                              \
    }                                                                              \
}

GS_DEFINE_ELEMENTWISE(float, f32, sqrtf, expf)
GS_DEFINE_ELEMENTWISE(double, f64, sqrt, exp)

/* Scan one feature whose values are sorted ascending.  Candidate cut k lies
 * between positions k and k+1 where the values differ.  Returns the best cut
 * index (or -1 when the feature is constant) and writes its weighted Gini
 * impurity; ties keep the earliest (lowest threshold) cut. */
static ptrdiff_t best_gini_cut(const double *restrict values,
                               const unsigned char *restrict labels,
                               ptrdiff_t n, double *restrict best_out)
{
    ptrdiff_t total_pos = 0;
    for (ptrdiff_t i = 0; i < n; ++i) total_pos += labels[i];
    const double dn = (double)n;
    double best = INFINITY;
    ptrdiff_t best_k = -1;
    ptrdiff_t pos_left = 0;
    for (ptrdiff_t k = 0; k + 1 < n; ++k) {
        pos_left += labels[k];
        if (!(values[k] < values[k + 1])) continue;
        const double n_l = (double)(k + 1);
        const double n_r = dn - n_l;
        const double p_l = (double)pos_left;
        const double p_r = (double)(total_pos - pos_left);
        const double imp = (2.0 * p_l * (n_l - p_l) / n_l
                            + 2.0 * p_r * (n_r - p_r) / n_r) / dn;
        if (imp < best) {
            best = imp;
            best_k = k;
        }
    }
    *best_out = best;
    return best_k;
}

/* For every row of a, the smallest squared Euclidean distance to a row of b,
 * and the index of that row (lowest index on ties). */
static void min_sq_distances(const double *restrict a, const double *restrict b,
                             ptrdiff_t na, ptrdiff_t nb, ptrdiff_t d,
                             double *restrict out, ptrdiff_t *restrict arg)
{
    for (ptrdiff_t i = 0; i < na; ++i) {
        const double *restrict ai = a + i * d;
        double best = INFINITY;
        ptrdiff_t best_j = -1;
        for (ptrdiff_t j = 0; j < nb; ++j) {
            const double *restrict bj = b + j * d;
            double acc = 0.0;
            for (ptrdiff_t c = 0; c < d; ++c) {
                const double diff = ai[c] - bj[c];
                acc += diff * diff;
            }
            if (acc < best) {
                best = acc;
                best_j = j;
            }
        }
        out[i] = best;
        arg[i] = best_j;
    }
}

#endif
