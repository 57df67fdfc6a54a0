"""Pure-numpy sequence kernels: the fallback when the extension is not built.

Both kernels process one layer over a whole sequence.  ``layer_forward``
returns everything the backward pass needs: per-step hidden and internal
states, tanh of the internal state, the four activations, and the raw gate
pre-activations (the ramp/saturation split of the piecewise gate derivative
is decided from the pre-activation, not the activation value).

Layout contract (shared with the compiled kernel):
    xs            (T, d)   inputs
    W_*x          (c, d)   input projections
    W_*h          (c, c)   recurrent projections
    b_*           (c,)     biases
    returns       H, S, P, G, I, F, O, ZI, ZF, ZO  each (T, c)
"""

from __future__ import annotations

import numpy as np


def layer_forward(xs, w_gx, w_gh, b_g, w_ix, w_ih, b_i, w_fx, w_fh, b_f, w_ox, w_oh, b_o,
                  h0, s0, t_l, t_h, slope, intercept):
    steps = xs.shape[0]
    cells = w_gx.shape[0]
    H = np.empty((steps, cells))
    S = np.empty((steps, cells))
    P = np.empty((steps, cells))
    G = np.empty((steps, cells))
    I = np.empty((steps, cells))
    F = np.empty((steps, cells))
    O = np.empty((steps, cells))
    ZI = np.empty((steps, cells))
    ZF = np.empty((steps, cells))
    ZO = np.empty((steps, cells))

    h_prev = h0
    s_prev = s0
    for t in range(steps):
        x = xs[t]
        zg = w_gx @ x + w_gh @ h_prev + b_g
        zi = w_ix @ x + w_ih @ h_prev + b_i
        zf = w_fx @ x + w_fh @ h_prev + b_f
        zo = w_ox @ x + w_oh @ h_prev + b_o

        g = np.tanh(zg)
        i = _hard_sigmoid(zi, t_l, t_h, slope, intercept)
        f = _hard_sigmoid(zf, t_l, t_h, slope, intercept)
        o = _hard_sigmoid(zo, t_l, t_h, slope, intercept)

        s = g * i + s_prev * f
        p = np.tanh(s)
        h = p * o

        G[t] = g
        I[t] = i
        F[t] = f
        O[t] = o
        ZI[t] = zi
        ZF[t] = zf
        ZO[t] = zo
        S[t] = s
        P[t] = p
        H[t] = h
        h_prev = h
        s_prev = s

    return H, S, P, G, I, F, O, ZI, ZF, ZO


def layer_backward(xs, dH, H, S, P, G, I, F, O, ZI, ZF, ZO,
                   w_gx, w_gh, w_ix, w_ih, w_fx, w_fh, w_ox, w_oh,
                   h0, s0, t_l, t_h, slope):
    steps, cells = H.shape
    d = xs.shape[1]

    d_wgx = np.zeros((cells, d))
    d_wgh = np.zeros((cells, cells))
    d_bg = np.zeros(cells)
    d_wix = np.zeros((cells, d))
    d_wih = np.zeros((cells, cells))
    d_bi = np.zeros(cells)
    d_wfx = np.zeros((cells, d))
    d_wfh = np.zeros((cells, cells))
    d_bf = np.zeros(cells)
    d_wox = np.zeros((cells, d))
    d_woh = np.zeros((cells, cells))
    d_bo = np.zeros(cells)
    dXs = np.zeros((steps, d))

    dh_carry = np.zeros(cells)
    ds_carry = np.zeros(cells)

    for t in range(steps - 1, -1, -1):
        dh = dH[t] + dh_carry
        p = P[t]
        do = dh * p
        ds = ds_carry + dh * O[t] * (1.0 - p * p)

        s_prev = S[t - 1] if t > 0 else s0
        h_prev = H[t - 1] if t > 0 else h0

        dg = ds * I[t]
        di = ds * G[t]
        df = ds * s_prev

        dzg = dg * (1.0 - G[t] * G[t])
        dzi = di * _ramp_grad(ZI[t], t_l, t_h, slope)
        dzf = df * _ramp_grad(ZF[t], t_l, t_h, slope)
        dzo = do * _ramp_grad(ZO[t], t_l, t_h, slope)

        x = xs[t]
        d_wgx += np.outer(dzg, x)
        d_wgh += np.outer(dzg, h_prev)
        d_bg += dzg
        d_wix += np.outer(dzi, x)
        d_wih += np.outer(dzi, h_prev)
        d_bi += dzi
        d_wfx += np.outer(dzf, x)
        d_wfh += np.outer(dzf, h_prev)
        d_bf += dzf
        d_wox += np.outer(dzo, x)
        d_woh += np.outer(dzo, h_prev)
        d_bo += dzo

        dXs[t] = w_gx.T @ dzg + w_ix.T @ dzi + w_fx.T @ dzf + w_ox.T @ dzo
        dh_carry = w_gh.T @ dzg + w_ih.T @ dzi + w_fh.T @ dzf + w_oh.T @ dzo
        ds_carry = ds * F[t]

    return (d_wgx, d_wgh, d_bg, d_wix, d_wih, d_bi, d_wfx, d_wfh, d_bf,
            d_wox, d_woh, d_bo, dXs, dh_carry, ds_carry)


def _hard_sigmoid(z, t_l, t_h, slope, intercept):
    out = slope * z + intercept
    out = np.where(z <= t_l, 0.0, out)
    return np.where(z >= t_h, 1.0, out)


def _ramp_grad(z, t_l, t_h, slope):
    return np.where((z > t_l) & (z < t_h), slope, 0.0)
