# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Fused banded evaluation of the master-equation right-hand side.

Same contract as the pure-numpy module, written as explicit loops so each
register-block pair is handled in a single pass without temporaries beyond
a pair of scratch blocks for the oscillator-dephasing products.
"""

import numpy as np


def rhs(double complex[:, :, :, ::1] rho,
        double complex[:, :, :, ::1] out,
        double complex[:, :, ::1] scratch,
        double[::1] block_scale,
        double complex alpha,
        bint include_number,
        double kappa_l,
        double kappa_phi,
        double gamma_l,
        double gamma_phi,
        double[:, ::1] hamming,
        double[::1] zero_bits,
        long[::1] bit_masks,
        double[::1] sqrt_n):
    cdef Py_ssize_t n_blocks = rho.shape[0]
    cdef Py_ssize_t f = rho.shape[1]
    cdef Py_ssize_t b, b2, i, j, m, src_b, src_b2
    cdef long mask
    cdef double sb, sb2, diag_pen
    cdef double complex alpha_c = alpha.conjugate()
    cdef double complex r, t_left, t_right, acc, row_op, sandwich, left_sq, right_sq

    for b in range(n_blocks):
        sb = block_scale[b]
        for b2 in range(n_blocks):
            sb2 = block_scale[b2]
            diag_pen = gamma_phi * hamming[b, b2] \
                + 0.5 * gamma_l * (zero_bits[b] + zero_bits[b2])
            for i in range(f):
                for j in range(f):
                    r = rho[b, i, b2, j]
                    t_left = 0
                    t_right = 0
                    if include_number:
                        t_left = i * r
                        t_right = j * r
                    if i > 0:
                        t_left = t_left + alpha * sqrt_n[i] * rho[b, i - 1, b2, j]
                    if i + 1 < f:
                        t_left = t_left + alpha_c * sqrt_n[i + 1] * rho[b, i + 1, b2, j]
                    if j + 1 < f:
                        t_right = t_right + alpha * sqrt_n[j + 1] * rho[b, i, b2, j + 1]
                    if j > 0:
                        t_right = t_right + alpha_c * sqrt_n[j] * rho[b, i, b2, j - 1]
                    acc = -1j * (sb * t_left - sb2 * t_right)
                    if kappa_l != 0.0:
                        acc = acc - 0.5 * kappa_l * (i + j) * r
                        if i + 1 < f and j + 1 < f:
                            acc = acc + kappa_l * sqrt_n[i + 1] * sqrt_n[j + 1] \
                                * rho[b, i + 1, b2, j + 1]
                    acc = acc - diag_pen * r
                    out[b, i, b2, j] = acc

            if kappa_phi != 0.0:
                # scratch[0] = T rho, scratch[1] = rho T, number part always on
                for i in range(f):
                    for j in range(f):
                        r = rho[b, i, b2, j]
                        t_left = i * r
                        t_right = j * r
                        if i > 0:
                            t_left = t_left + alpha * sqrt_n[i] * rho[b, i - 1, b2, j]
                        if i + 1 < f:
                            t_left = t_left + alpha_c * sqrt_n[i + 1] * rho[b, i + 1, b2, j]
                        if j + 1 < f:
                            t_right = t_right + alpha * sqrt_n[j + 1] * rho[b, i, b2, j + 1]
                        if j > 0:
                            t_right = t_right + alpha_c * sqrt_n[j] * rho[b, i, b2, j - 1]
                        scratch[0, i, j] = t_left
                        scratch[1, i, j] = t_right
                for i in range(f):
                    for j in range(f):
                        sandwich = i * scratch[1, i, j]
                        left_sq = i * scratch[0, i, j]
                        right_sq = j * scratch[1, i, j]
                        if i > 0:
                            row_op = alpha * sqrt_n[i]
                            sandwich = sandwich + row_op * scratch[1, i - 1, j]
                            left_sq = left_sq + row_op * scratch[0, i - 1, j]
                        if i + 1 < f:
                            row_op = alpha_c * sqrt_n[i + 1]
                            sandwich = sandwich + row_op * scratch[1, i + 1, j]
                            left_sq = left_sq + row_op * scratch[0, i + 1, j]
                        if j + 1 < f:
                            right_sq = right_sq + alpha * sqrt_n[j + 1] * scratch[1, i, j + 1]
                        if j > 0:
                            right_sq = right_sq + alpha_c * sqrt_n[j] * scratch[1, i, j - 1]
                        out[b, i, b2, j] = out[b, i, b2, j] \
                            + kappa_phi * (2 * sandwich - left_sq - right_sq)

    if gamma_l != 0.0:
        for m in range(bit_masks.shape[0]):
            mask = bit_masks[m]
            for b in range(n_blocks):
                if not (b & mask):
                    continue
                src_b = b - mask
                for b2 in range(n_blocks):
                    if not (b2 & mask):
                        continue
                    src_b2 = b2 - mask
                    for i in range(f):
                        for j in range(f):
                            out[b, i, b2, j] = out[b, i, b2, j] \
                                + gamma_l * rho[src_b, i, src_b2, j]
