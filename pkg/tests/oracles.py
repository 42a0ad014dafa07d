"""Independent brute-force references for the detector statistics.

Everything here recomputes from raw segment matrices with numpy's
generic routines (slogdet, explicit means) and no cumulative-sum
sharing, so it stays structurally independent of the fast path it
checks.
"""

import numpy as np


def segment_scatter(z):
    """(mean, scatter) of an (N, count) segment, computed directly."""
    mean = z.mean(axis=1)
    dev = z - mean[:, None]
    return mean, dev @ dev.T


def is_pd(a, rtol=1e-10):
    """Positive definiteness via eigenvalues against the scale-relative tolerance."""
    n = a.shape[0]
    tol = rtol * np.trace(a) / n
    return np.linalg.eigvalsh(a).min() > tol


def logdet(a):
    sign, value = np.linalg.slogdet(a)
    assert sign > 0
    return value


def split_terms(z, k1):
    """(h1_term, h0_sum_term, mncd_term, spd_term) at one split, or None if unusable."""
    n, k = z.shape
    z1, z2 = z[:, :k1], z[:, k1:]
    _, a1 = segment_scatter(z1)
    _, a2 = segment_scatter(z2)
    _, a0 = segment_scatter(z)
    k2 = k - k1
    if not (is_pd(a1) and is_pd(a2)):
        return None
    h1 = -k1 / 2 * logdet(a1 / k1) - k2 / 2 * logdet(a2 / k2)
    h0 = k / 2 * logdet((a1 + a2) / k)
    mncd = h1 + k / 2 * logdet(a0 / k)
    spd = -logdet(a1 + a2) + logdet(a0)
    return h1, h0, mncd, spd


def brute_force_statistic(z, grid, kind, variant="as-written"):
    """Grid-maximized statistic evaluated split by split from scratch."""
    z = np.asarray(z, dtype=np.float64)
    terms = {k1: split_terms(z, int(k1)) for k1 in grid}
    usable = {k1: t for k1, t in terms.items() if t is not None}
    assert usable, "no usable split for oracle"
    if kind == "ncd":
        first = max(t[0] for t in usable.values())
        seconds = [t[1] for t in usable.values()]
        second = max(seconds) if variant == "as-written" else min(seconds)
        return first + second
    if kind == "mncd":
        return max(t[2] for t in usable.values())
    if kind == "spd":
        return max(t[3] for t in usable.values())
    raise ValueError(kind)


def random_window(rng, n, k, mean_scale=30.0, cov_scale=3.0):
    """Random Gaussian window with a random mean and random SPD covariance."""
    mean = rng.uniform(-mean_scale, mean_scale, size=n)
    a = rng.standard_normal((n, n))
    cov = a @ a.T + cov_scale * np.eye(n)
    chol = np.linalg.cholesky(cov)
    return mean[:, None] + chol @ rng.standard_normal((n, k))


def random_invertible(rng, n, spread=2.0):
    """Well-conditioned random invertible matrix (singular values in [1/spread, spread])."""
    q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    s = np.exp(rng.uniform(-np.log(spread), np.log(spread), size=n))
    return q1 @ np.diag(s) @ q2


def numeric_mle_loglike(samples):
    """Numerically maximized Gaussian log likelihood of an (T, N) segment.

    Ascends over (mean, Cholesky factor of the covariance) with
    Nelder-Mead from a perturbed start; the returned value is the best
    log likelihood the ascent found.
    """
    from scipy.optimize import minimize

    x = np.asarray(samples, dtype=np.float64)
    t, n = x.shape
    mean0 = x.mean(axis=0) + 0.05
    cov0 = np.cov(x.T, bias=True).reshape(n, n) * 1.2 + 0.1 * np.eye(n)
    chol0 = np.linalg.cholesky(cov0)
    tril = np.tril_indices(n)

    def unpack(theta):
        mean = theta[:n]
        lmat = np.zeros((n, n))
        lmat[tril] = theta[n:]
        # exponentiate the diagonal to keep the factor nonsingular
        lmat[np.diag_indices(n)] = np.exp(lmat[np.diag_indices(n)])
        return mean, lmat

    def negloglike(theta):
        mean, lmat = unpack(theta)
        cov = lmat @ lmat.T
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            return 1e12
        dev = x - mean
        y = np.linalg.solve(chol, dev.T)
        ld = 2 * np.log(np.diag(chol)).sum()
        return 0.5 * (t * n * np.log(2 * np.pi) + t * ld + np.sum(y * y))

    # start from the perturbed factor, diagonal entries in log space
    start = np.zeros(n + len(tril[0]))
    start[:n] = mean0
    packed = chol0[tril]
    for idx, (r, c) in enumerate(zip(*tril)):
        start[n + idx] = np.log(max(packed[idx], 1e-6)) if r == c else packed[idx]
    res = minimize(negloglike, start, method="Nelder-Mead",
                   options={"maxiter": 20000, "xatol": 1e-10, "fatol": 1e-12})
    return -res.fun
