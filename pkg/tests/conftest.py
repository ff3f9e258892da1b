import numpy as np
import pytest


def block_standard_error(series, n_blocks=16):
    """Standard error of the mean of a correlated series via blocking."""
    series = np.asarray(series)
    usable = (len(series) // n_blocks) * n_blocks
    blocks = series[:usable].reshape(n_blocks, -1).mean(axis=1)
    return float(blocks.std(ddof=1) / np.sqrt(n_blocks))


def r_squared(x, y):
    keep = np.isfinite(x) & np.isfinite(y)
    x, y = np.asarray(x)[keep], np.asarray(y)[keep]
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    return 1.0 - resid.var() / y.var()


def random_stable_system(rng, n, complex_valued=False):
    """Random strictly stable drift and PSD diffusion of size n."""
    if complex_valued:
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    else:
        A = rng.standard_normal((n, n))
        B = rng.standard_normal((n, n))
    shift = np.max(np.linalg.eigvals(A).real)
    A -= (shift + rng.uniform(0.2, 2.0)) * np.eye(n)
    D = B @ B.conj().T
    return A, D


@pytest.fixture(scope="session")
def paper():
    from clocksync import paper_preset
    return paper_preset()
