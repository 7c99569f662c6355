import numpy as np
import pytest

from hawkesflock.core import EventStream, FlockParams, Mark


@pytest.fixture(scope="session")
def col1():
    """Reference parameter set 1 of the recovery benchmark."""
    return FlockParams(mu1=0.08, beta1=0.6, alpha1s=0.4, alpha1c=0.0,
                       alpha1n=0.0, alpha1w=0.2,
                       mu2=0.05, beta2=1.2, alpha2s=0.5, alpha2c=0.3,
                       alpha2n=0.0, alpha2w=0.1)


@pytest.fixture(scope="session")
def generic_params():
    """All twelve entries distinct and nonzero; exercises every kernel slot."""
    return FlockParams(mu1=0.07, beta1=0.9, alpha1s=0.25, alpha1c=0.15,
                       alpha1n=0.05, alpha1w=0.30,
                       mu2=0.06, beta2=1.4, alpha2s=0.35, alpha2c=0.20,
                       alpha2n=0.10, alpha2w=0.22)


def random_stream(rng, n=50, horizon=100.0, init1=0.0, init2=0.0):
    times = np.sort(rng.uniform(0.0, horizon, size=n))
    while np.any(np.diff(times) <= 0):
        times = np.sort(rng.uniform(0.0, horizon, size=n))
    marks = rng.integers(0, 4, size=n)
    return EventStream(times=times, marks=marks, horizon=horizon,
                       init1=init1, init2=init2)


def loglik_bruteforce(stream: EventStream, params: FlockParams) -> float:
    """O(n^2) likelihood straight from the kernel-sum definition; the oracle
    against which the recursive implementation is checked."""
    mu = params.mu_vector()
    beta = params.beta_vector()
    c1s, c2s = stream.prices_before
    cols = [params.jump_column(Mark(int(m)), c1s[k], c2s[k])
            for k, m in enumerate(stream.marks)]
    ll = 0.0
    for k in range(len(stream)):
        lam = mu.copy()
        for j in range(k):
            lam = lam + cols[j] * np.exp(-beta * (stream.times[k] - stream.times[j]))
        if lam[stream.marks[k]] <= 0:
            return -np.inf
        ll += np.log(lam[stream.marks[k]])
    integral = mu.sum() * stream.horizon
    for j in range(len(stream)):
        integral += np.sum(cols[j] * (1.0 - np.exp(-beta * (stream.horizon - stream.times[j])))
                           / beta)
    return ll - integral
