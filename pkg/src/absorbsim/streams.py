"""Counter-based random streams keyed by (seed, trial, molecule).

Every molecule owns its own stream, so simulation output is a pure function
of (config, seed) no matter how trials or molecules are scheduled across
workers. Draw ``i`` of a stream is a pure function of
(seed, trial, molecule, i): a SplitMix64-style finalizer applied to a
golden-ratio Weyl sequence, giving random access without sequential state.

Fixed, documented transforms (changing either changes every simulation):
  * uniforms map the top 53 bits to (0, 1] via ((bits >> 11) + 1) * 2**-53;
  * normals are the inverse normal CDF (scipy's ndtri) of a uniform taken
    from the open interval (0, 1), one 64-bit draw per variate.

All mixing arithmetic lives in uint64 numpy arrays, which wrap modulo 2**64
without warnings; numpy scalar uint64 arithmetic warns on overflow and is
avoided on purpose.
"""
from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_2 = np.uint64(0x94D049BB133111EB)
_SEED_SALT = np.uint64(0xA0761D6478BD642F)
_TRIAL_SALT = np.uint64(0xE7037ED1A0B428DB)
_U53 = 2.0**-53


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX_1
    z = (z ^ (z >> np.uint64(27))) * _MIX_2
    return z ^ (z >> np.uint64(31))


def _stream_states(seed: int, trial_id: int, molecule_ids) -> np.ndarray:
    """Initial Weyl offset of each (seed, trial, molecule) stream."""
    base = _mix64(np.array([seed], dtype=np.uint64) + _SEED_SALT)
    base = _mix64(base + np.array([trial_id], dtype=np.uint64) * _TRIAL_SALT)
    mids = np.asarray(molecule_ids, dtype=np.uint64)
    return _mix64(base + mids * _GAMMA)


def _raw_draws(states: np.ndarray, indices: np.ndarray) -> np.ndarray:
    return _mix64(states + (indices + np.uint64(1)) * _GAMMA)


def _to_uniform_open_closed(bits: np.ndarray) -> np.ndarray:
    return ((bits >> np.uint64(11)) + np.uint64(1)) * _U53


def _to_normal(bits: np.ndarray) -> np.ndarray:
    u = ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * _U53
    return ndtri(u)


class StreamBundle:
    """Vectorized bank of per-molecule streams for one trial.

    ``normals(idx)`` / ``uniforms(idx)`` draw for the selected molecules and
    advance exactly those molecules' counters, reproducing what each
    molecule's scalar :class:`RandomStream` would have produced.
    """

    def __init__(self, seed: int, trial_id: int, num_molecules: int):
        self.states = _stream_states(seed, trial_id, np.arange(num_molecules))
        self.counters = np.zeros(num_molecules, dtype=np.uint64)

    def normals(self, idx: np.ndarray, count: int = 3) -> np.ndarray:
        """(len(idx), count) standard normals; consumes ``count`` draws each."""
        states = self.states[idx]
        start = self.counters[idx]
        cols = [
            _to_normal(_raw_draws(states, start + np.uint64(j)))
            for j in range(count)
        ]
        self.counters[idx] = start + np.uint64(count)
        return np.stack(cols, axis=1)

    def uniforms(self, idx: np.ndarray) -> np.ndarray:
        """(len(idx),) uniforms in (0, 1]; consumes one draw each."""
        start = self.counters[idx]
        out = _to_uniform_open_closed(_raw_draws(self.states[idx], start))
        self.counters[idx] = start + np.uint64(1)
        return out


class RandomStream:
    """Scalar view of a single molecule's stream.

    Same draw sequence as the corresponding :class:`StreamBundle` lane; used
    by the per-molecule operations and reference loops in the tests.
    """

    __slots__ = ("_state", "_counter")

    def __init__(self, state: np.ndarray, counter: int = 0):
        self._state = state  # shape-(1,) uint64
        self._counter = counter

    def next_normal(self) -> float:
        bits = _raw_draws(self._state, np.array([self._counter], dtype=np.uint64))
        self._counter += 1
        return float(_to_normal(bits)[0])

    def next_uniform(self) -> float:
        bits = _raw_draws(self._state, np.array([self._counter], dtype=np.uint64))
        self._counter += 1
        return float(_to_uniform_open_closed(bits)[0])


def make_stream(seed: int, trial_id: int, molecule_id: int) -> RandomStream:
    """Deterministic stream for one molecule of one trial."""
    return RandomStream(_stream_states(seed, trial_id, [molecule_id]))
