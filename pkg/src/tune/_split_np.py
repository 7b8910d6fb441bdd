"""Pure-numpy best-split search, the fallback when the compiled kernel is absent.

Both backends implement the same contract: given the rows of one tree node,
return the (feature, threshold, gain) triple maximizing the Newton gain

    G_L^2/H_L + G_R^2/H_R - G^2/H

over all axis-aligned threshold splits, or feature == -1 when no split is
admissible. With grad = -y and hess = 1 this reduces to the classic
sum-of-squared-error reduction criterion.
"""

import numpy as np

GAIN_EPS = 1e-12


def best_split(X, grad, hess, min_leaf, min_child_hess=0.0):
    n, p = X.shape
    if n < 2 * min_leaf:
        return -1, 0.0, 0.0
    g_total = grad.sum()
    h_total = hess.sum()
    parent = g_total * g_total / h_total
    best_feat, best_thr, best_gain = -1, 0.0, 0.0
    positions = np.arange(1, n)
    for j in range(p):
        col = X[:, j]
        order = np.argsort(col, kind="stable")
        cs = col[order]
        gl = np.cumsum(grad[order])[:-1]
        hl = np.cumsum(hess[order])[:-1]
        ok = (cs[1:] != cs[:-1]) & (positions >= min_leaf) & (n - positions >= min_leaf)
        if min_child_hess > 0.0:
            ok &= (hl >= min_child_hess) & (h_total - hl >= min_child_hess)
        if not ok.any():
            continue
        g_left = gl[ok]
        h_left = hl[ok]
        gains = (
            g_left * g_left / h_left
            + (g_total - g_left) ** 2 / (h_total - h_left)
            - parent
        )
        k = int(np.argmax(gains))
        if gains[k] > best_gain + GAIN_EPS:
            pos = int(np.nonzero(ok)[0][k])
            best_feat = j
            best_thr = 0.5 * (cs[pos] + cs[pos + 1])
            best_gain = float(gains[k])
    return best_feat, best_thr, best_gain
