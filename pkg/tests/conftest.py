import numpy as np
import pytest

from mslab.spectral import Grid, SpectralProfile


def band_limited_profile(grid, rng, max_mode=None, decay=2.0, mean_zero=True):
    """Random smooth profile with exponentially decaying random coefficients."""
    n = grid.num_points
    if max_mode is None:
        max_mode = n // 4
    coeffs = np.zeros(n, dtype=complex)
    for m in range(1, max_mode + 1):
        c = (rng.standard_normal() + 1j * rng.standard_normal()) * np.exp(-decay * m / max_mode)
        coeffs[m] = c
        coeffs[n - m] = np.conj(c)
    if not mean_zero:
        coeffs[0] = rng.standard_normal()
    return SpectralProfile.from_coeffs(grid, coeffs)


def dft_oracle(samples, grid):
    """Direct-summation discrete transform, independent of numpy.fft."""
    n = grid.num_points
    x = grid.nodes
    out = np.empty(n, dtype=complex)
    for m_idx, k in enumerate(grid.wavenumbers):
        out[m_idx] = np.sum(samples * np.exp(-1j * k * x)) / n
    return out


def poisson_box_energy(state, n_x=128, n_z=768, z_half=None):
    """2-d finite-difference Poisson oracle for the squared distance H.

    Solves -Laplace(phi) = chi on the periodic-in-x cell with Dirichlet
    walls at z = +-z_half using the 5-point stencil, and returns the
    integral of chi*phi.  Fully independent of the spectral Green's
    function evaluation in the package.
    """
    import scipy.sparse as sparse
    import scipy.sparse.linalg as spla

    grid = state.grid
    length = grid.length
    if z_half is None:
        z_half = 0.5 * length
    dx = length / n_x
    dz = 2.0 * z_half / n_z
    x = dx * np.arange(n_x)
    z = -z_half + dz * np.arange(1, n_z)
    h_at = state.h.evaluate(x)

    lo = np.minimum(h_at, 0.0)
    hi = np.maximum(h_at, 0.0)
    sgn = -np.sign(h_at)
    z_lo = z[None, :] - 0.5 * dz
    z_hi = z[None, :] + 0.5 * dz
    overlap = np.clip(np.minimum(z_hi, hi[:, None]) - np.maximum(z_lo, lo[:, None]), 0.0, None)
    chi = sgn[:, None] * overlap / dz  # (n_x, n_z-1)

    n_unknown = n_x * (n_z - 1)
    idx = np.arange(n_unknown).reshape(n_x, n_z - 1)
    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(np.broadcast_to(v, r.shape).ravel())

    add(idx, idx, 2.0 / dx**2 + 2.0 / dz**2)
    add(idx, np.roll(idx, 1, axis=0), -1.0 / dx**2)
    add(idx, np.roll(idx, -1, axis=0), -1.0 / dx**2)
    add(idx[:, 1:], idx[:, :-1], -1.0 / dz**2)
    add(idx[:, :-1], idx[:, 1:], -1.0 / dz**2)
    matrix = sparse.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_unknown, n_unknown),
    )
    rhs = chi.ravel()
    phi = spla.splu(matrix, permc_spec="MMD_AT_PLUS_A").solve(rhs)
    return float(np.sum(chi.ravel() * phi) * dx * dz)


@pytest.fixture
def rng():
    return np.random.default_rng(20170)
