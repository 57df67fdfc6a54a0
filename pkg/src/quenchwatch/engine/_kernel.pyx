# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled sequence kernels: the hot loops of the recurrent forward/backward pass.

Same contract as the pure-numpy twin in ``_kernel_py``; see that module for
the layout documentation.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport tanh

cnp.import_array()


cdef inline double _gate(double z, double t_l, double t_h, double slope, double intercept) nogil:
    if z <= t_l:
        return 0.0
    if z >= t_h:
        return 1.0
    return slope * z + intercept


cdef inline double _gate_grad(double z, double t_l, double t_h, double slope) nogil:
    if z > t_l and z < t_h:
        return slope
    return 0.0


def layer_forward(double[:, ::1] xs,
                  double[:, ::1] w_gx, double[:, ::1] w_gh, double[::1] b_g,
                  double[:, ::1] w_ix, double[:, ::1] w_ih, double[::1] b_i,
                  double[:, ::1] w_fx, double[:, ::1] w_fh, double[::1] b_f,
                  double[:, ::1] w_ox, double[:, ::1] w_oh, double[::1] b_o,
                  double[::1] h0, double[::1] s0,
                  double t_l, double t_h, double slope, double intercept):
    cdef Py_ssize_t steps = xs.shape[0]
    cdef Py_ssize_t d = xs.shape[1]
    cdef Py_ssize_t cells = w_gx.shape[0]

    H_arr = np.empty((steps, cells))
    S_arr = np.empty((steps, cells))
    P_arr = np.empty((steps, cells))
    G_arr = np.empty((steps, cells))
    I_arr = np.empty((steps, cells))
    F_arr = np.empty((steps, cells))
    O_arr = np.empty((steps, cells))
    ZI_arr = np.empty((steps, cells))
    ZF_arr = np.empty((steps, cells))
    ZO_arr = np.empty((steps, cells))

    cdef double[:, ::1] H = H_arr
    cdef double[:, ::1] S = S_arr
    cdef double[:, ::1] P = P_arr
    cdef double[:, ::1] G = G_arr
    cdef double[:, ::1] I = I_arr
    cdef double[:, ::1] F = F_arr
    cdef double[:, ::1] O = O_arr
    cdef double[:, ::1] ZI = ZI_arr
    cdef double[:, ::1] ZF = ZF_arr
    cdef double[:, ::1] ZO = ZO_arr

    cdef Py_ssize_t t, c, j
    cdef double zg, zi, zf, zo, g, iv, fv, ov, s, p, hp, sp

    with nogil:
        for t in range(steps):
            for c in range(cells):
                zg = b_g[c]
                zi = b_i[c]
                zf = b_f[c]
                zo = b_o[c]
                for j in range(d):
                    zg += w_gx[c, j] * xs[t, j]
                    zi += w_ix[c, j] * xs[t, j]
                    zf += w_fx[c, j] * xs[t, j]
                    zo += w_ox[c, j] * xs[t, j]
                if t == 0:
                    for j in range(cells):
                        hp = h0[j]
                        zg += w_gh[c, j] * hp
                        zi += w_ih[c, j] * hp
                        zf += w_fh[c, j] * hp
                        zo += w_oh[c, j] * hp
                else:
                    for j in range(cells):
                        hp = H[t - 1, j]
                        zg += w_gh[c, j] * hp
                        zi += w_ih[c, j] * hp
                        zf += w_fh[c, j] * hp
                        zo += w_oh[c, j] * hp

                g = tanh(zg)
                iv = _gate(zi, t_l, t_h, slope, intercept)
                fv = _gate(zf, t_l, t_h, slope, intercept)
                ov = _gate(zo, t_l, t_h, slope, intercept)
                sp = s0[c] if t == 0 else S[t - 1, c]
                s = g * iv + sp * fv
                p = tanh(s)

                G[t, c] = g
                I[t, c] = iv
                F[t, c] = fv
                O[t, c] = ov
                ZI[t, c] = zi
                ZF[t, c] = zf
                ZO[t, c] = zo
                S[t, c] = s
                P[t, c] = p
                H[t, c] = p * ov

    return H_arr, S_arr, P_arr, G_arr, I_arr, F_arr, O_arr, ZI_arr, ZF_arr, ZO_arr


def layer_backward(double[:, ::1] xs, double[:, ::1] dH,
                   double[:, ::1] H, double[:, ::1] S, double[:, ::1] P,
                   double[:, ::1] G, double[:, ::1] I, double[:, ::1] F, double[:, ::1] O,
                   double[:, ::1] ZI, double[:, ::1] ZF, double[:, ::1] ZO,
                   double[:, ::1] w_gx, double[:, ::1] w_gh,
                   double[:, ::1] w_ix, double[:, ::1] w_ih,
                   double[:, ::1] w_fx, double[:, ::1] w_fh,
                   double[:, ::1] w_ox, double[:, ::1] w_oh,
                   double[::1] h0, double[::1] s0,
                   double t_l, double t_h, double slope):
    cdef Py_ssize_t steps = xs.shape[0]
    cdef Py_ssize_t d = xs.shape[1]
    cdef Py_ssize_t cells = H.shape[1]

    d_wgx_arr = np.zeros((cells, d))
    d_wgh_arr = np.zeros((cells, cells))
    d_bg_arr = np.zeros(cells)
    d_wix_arr = np.zeros((cells, d))
    d_wih_arr = np.zeros((cells, cells))
    d_bi_arr = np.zeros(cells)
    d_wfx_arr = np.zeros((cells, d))
    d_wfh_arr = np.zeros((cells, cells))
    d_bf_arr = np.zeros(cells)
    d_wox_arr = np.zeros((cells, d))
    d_woh_arr = np.zeros((cells, cells))
    d_bo_arr = np.zeros(cells)
    dXs_arr = np.zeros((steps, d))
    dh_carry_arr = np.zeros(cells)
    ds_carry_arr = np.zeros(cells)

    cdef double[:, ::1] d_wgx = d_wgx_arr
    cdef double[:, ::1] d_wgh = d_wgh_arr
    cdef double[::1] d_bg = d_bg_arr
    cdef double[:, ::1] d_wix = d_wix_arr
    cdef double[:, ::1] d_wih = d_wih_arr
    cdef double[::1] d_bi = d_bi_arr
    cdef double[:, ::1] d_wfx = d_wfx_arr
    cdef double[:, ::1] d_wfh = d_wfh_arr
    cdef double[::1] d_bf = d_bf_arr
    cdef double[:, ::1] d_wox = d_wox_arr
    cdef double[:, ::1] d_woh = d_woh_arr
    cdef double[::1] d_bo = d_bo_arr
    cdef double[:, ::1] dXs = dXs_arr
    cdef double[::1] dh_carry = dh_carry_arr
    cdef double[::1] ds_carry = ds_carry_arr

    dz_arr = np.zeros((4, cells))
    cdef double[:, ::1] dz = dz_arr

    cdef Py_ssize_t t, c, j
    cdef double dh, ds, p, do_, dg, di, df, sprev, hprev, dzg, dzi, dzf, dzo

    with nogil:
        for t in range(steps - 1, -1, -1):
            for c in range(cells):
                dh = dH[t, c] + dh_carry[c]
                p = P[t, c]
                do_ = dh * p
                ds = ds_carry[c] + dh * O[t, c] * (1.0 - p * p)

                sprev = s0[c] if t == 0 else S[t - 1, c]

                dg = ds * I[t, c]
                di = ds * G[t, c]
                df = ds * sprev

                dzg = dg * (1.0 - G[t, c] * G[t, c])
                dzi = di * _gate_grad(ZI[t, c], t_l, t_h, slope)
                dzf = df * _gate_grad(ZF[t, c], t_l, t_h, slope)
                dzo = do_ * _gate_grad(ZO[t, c], t_l, t_h, slope)

                dz[0, c] = dzg
                dz[1, c] = dzi
                dz[2, c] = dzf
                dz[3, c] = dzo

                d_bg[c] += dzg
                d_bi[c] += dzi
                d_bf[c] += dzf
                d_bo[c] += dzo
                for j in range(d):
                    d_wgx[c, j] += dzg * xs[t, j]
                    d_wix[c, j] += dzi * xs[t, j]
                    d_wfx[c, j] += dzf * xs[t, j]
                    d_wox[c, j] += dzo * xs[t, j]
                if t == 0:
                    for j in range(cells):
                        hprev = h0[j]
                        d_wgh[c, j] += dzg * hprev
                        d_wih[c, j] += dzi * hprev
                        d_wfh[c, j] += dzf * hprev
                        d_woh[c, j] += dzo * hprev
                else:
                    for j in range(cells):
                        hprev = H[t - 1, j]
                        d_wgh[c, j] += dzg * hprev
                        d_wih[c, j] += dzi * hprev
                        d_wfh[c, j] += dzf * hprev
                        d_woh[c, j] += dzo * hprev

                ds_carry[c] = ds * F[t, c]

            for j in range(d):
                dXs[t, j] = 0.0
                for c in range(cells):
                    dXs[t, j] += (w_gx[c, j] * dz[0, c] + w_ix[c, j] * dz[1, c]
                                  + w_fx[c, j] * dz[2, c] + w_ox[c, j] * dz[3, c])
            for j in range(cells):
                dh_carry[j] = 0.0
                for c in range(cells):
                    dh_carry[j] += (w_gh[c, j] * dz[0, c] + w_ih[c, j] * dz[1, c]
                                    + w_fh[c, j] * dz[2, c] + w_oh[c, j] * dz[3, c])

    return (d_wgx_arr, d_wgh_arr, d_bg_arr, d_wix_arr, d_wih_arr, d_bi_arr,
            d_wfx_arr, d_wfh_arr, d_bf_arr, d_wox_arr, d_woh_arr, d_bo_arr,
            dXs_arr, dh_carry_arr, ds_carry_arr)
