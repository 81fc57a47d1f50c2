"""Deterministic 64-bit seed derivation.

Every per-record / per-job / per-step seed in this package is derived from a
master seed by ``derive_seed(master, index)`` so any worker can reconstruct
its RNG stream from the pair alone.  The rule is the SplitMix64 output
function applied to ``master + (index + 1) * GOLDEN`` (all mod 2**64):

    z  = master + (index + 1) * 0x9E3779B97F4A7C15
    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

Other implementations can match our streams by reproducing this mixing.
"""

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def derive_seed(master_seed: int, index: int) -> int:
    """Hash (master_seed, index) into a 64-bit seed via SplitMix64 mixing."""
    z = (master_seed + (index + 1) * _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64
