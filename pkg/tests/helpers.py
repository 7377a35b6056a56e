import numpy as np


def random_hermitian(n, rng, psd=False):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a @ a.conj().T if psd else 0.5 * (a + a.conj().T)
