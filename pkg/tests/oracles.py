"""Independent oracles used across the test suite.

These deliberately avoid the library's own code paths: densities are
evaluated via numpy.linalg instead of the 2x2 adjugate, integrals via
Gauss-Legendre quadrature, CTC via brute-force alignment enumeration, and
gradients via central finite differences.
"""

import itertools

import numpy as np


def dens(mean, cov, pts):
    """Gaussian density at pts (N,2) via numpy.linalg (no library code)."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    inv = np.linalg.inv(cov)
    det = np.linalg.det(cov)
    d = pts - mean
    q = np.einsum("ni,ij,nj->n", d, inv, d)
    return np.exp(-0.5 * q) / (2.0 * np.pi * np.sqrt(det))


def _gl_grid(means, covs, n):
    """Shared Gauss-Legendre grid covering all listed Gaussians."""
    radii = [10.0 * np.sqrt(np.trace(np.asarray(c, dtype=float))) + 1.0 for c in covs]
    lo = np.min([np.asarray(m, float) - r for m, r in zip(means, radii)], axis=0)
    hi = np.max([np.asarray(m, float) + r for m, r in zip(means, radii)], axis=0)
    xs, wx = np.polynomial.legendre.leggauss(n)
    gx = 0.5 * (hi[0] - lo[0]) * xs + 0.5 * (hi[0] + lo[0])
    gy = 0.5 * (hi[1] - lo[1]) * xs + 0.5 * (hi[1] + lo[1])
    wgx = 0.5 * (hi[0] - lo[0]) * wx
    wgy = 0.5 * (hi[1] - lo[1]) * wx
    pts = np.stack(np.meshgrid(gx, gy, indexing="ij"), axis=-1).reshape(-1, 2)
    w = np.outer(wgx, wgy).reshape(-1)
    return pts, w


def product_box(mean_a, cov_a, mean_b, cov_b, nsigma=12.0):
    """Box covering the support of the product density (itself a Gaussian),
    derived with numpy.linalg only. The box cannot bias the integral, it
    only has to cover it; 12 sigma leaves tail mass ~1e-31."""
    ia = np.linalg.inv(np.asarray(cov_a, dtype=float))
    ib = np.linalg.inv(np.asarray(cov_b, dtype=float))
    pc = np.linalg.inv(ia + ib)
    pm = pc @ (ia @ np.asarray(mean_a, float) + ib @ np.asarray(mean_b, float))
    r = nsigma * np.sqrt(np.max(np.linalg.eigvalsh(pc))) + 1e-9
    return pm - r, pm + r


def quad_product_integral(mean_a, cov_a, mean_b, cov_b, n=160):
    """2-D Gauss-Legendre quadrature of the product of two densities over
    the product-support box (tight, so narrow ridges stay resolved)."""
    lo, hi = product_box(mean_a, cov_a, mean_b, cov_b)
    xs, wx = np.polynomial.legendre.leggauss(n)
    gx = 0.5 * (hi[0] - lo[0]) * xs + 0.5 * (hi[0] + lo[0])
    gy = 0.5 * (hi[1] - lo[1]) * xs + 0.5 * (hi[1] + lo[1])
    wgx = 0.5 * (hi[0] - lo[0]) * wx
    wgy = 0.5 * (hi[1] - lo[1]) * wx
    pts = np.stack(np.meshgrid(gx, gy, indexing="ij"), axis=-1).reshape(-1, 2)
    w = np.outer(wgx, wgy).reshape(-1)
    return float(np.sum(w * dens(mean_a, cov_a, pts) * dens(mean_b, cov_b, pts)))


def quad_log_density(mean, cov, x, n=400):
    """log density at x with the normalizer obtained by quadrature, not
    from the closed form: Z = integral of exp(-q/2)."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    inv = np.linalg.inv(cov)
    pts, w = _gl_grid([mean], [cov], n)
    d = pts - mean
    q = np.einsum("ni,ij,nj->n", d, inv, d)
    z = float(np.sum(w * np.exp(-0.5 * q)))
    dx = np.asarray(x, dtype=float) - mean
    qx = float(dx @ inv @ dx)
    return -0.5 * qx - np.log(z)


def ctc_collapse(path, blank):
    """Merge repeats, then drop blanks (the standard CTC mapping)."""
    out = []
    prev = None
    for c in path:
        if c != prev:
            out.append(c)
        prev = c
    return [c for c in out if c != blank]


def ctc_brute_force(probs, labels, blank):
    """-log sum over ALL class sequences whose collapse equals labels.

    Enumerates paths over the label alphabet plus blank; classes not in the
    labels can never collapse to them, so the restriction is exact.
    """
    probs = np.asarray(probs, dtype=float)
    T = probs.shape[0]
    classes = sorted(set(labels)) + [blank]
    labels = list(labels)
    total = 0.0
    for path in itertools.product(classes, repeat=T):
        if ctc_collapse(path, blank) == labels:
            p = 1.0
            for t, c in enumerate(path):
                p *= probs[t, c]
            total += p
    if total == 0.0:
        return float("inf")
    return -float(np.log(total))


def finite_diff(f, x, h=1e-6):
    """Central finite differences of scalar f over array x."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        xp = x.copy()
        xm = x.copy()
        xp[idx] += h
        xm[idx] -= h
        g[idx] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def rel_close(a, b, rtol, atol=1e-10):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.all(np.abs(a - b) <= atol + rtol * np.maximum(np.abs(a), np.abs(b)))


def random_spd(rng, lo=1.0, hi=50.0):
    """Random 2x2 SPD matrix with eigenvalues in [lo, hi]."""
    theta = rng.uniform(0, np.pi)
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    eig = rng.uniform(lo, hi, size=2)
    return rot @ np.diag(eig) @ rot.T
