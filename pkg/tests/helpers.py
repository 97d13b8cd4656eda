"""Shared test utilities (not oracles)."""

import math

from mtc.surface import SelfFoldedError, flip


def flippable(t):
    out = []
    for e in t.arcs:
        try:
            flip(t, e)
        except SelfFoldedError:
            continue
        out.append(e)
    return out


def random_flips(t, rng, length):
    """A random admissible flip sequence from ``t`` with its triangulations."""
    seq, snaps = [], [t]
    for _ in range(length):
        choices = flippable(snaps[-1])
        if not choices:
            break
        e = rng.choice(choices)
        seq.append(e)
        snaps.append(flip(snaps[-1], e)[0])
    return seq, snaps


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def isclose_c(a, b, tol):
    return abs(complex(a) - complex(b)) <= tol


def unit(angle):
    return complex(math.cos(angle), math.sin(angle))
