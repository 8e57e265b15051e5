"""Independent reference computations used to freeze expected values.

Nothing here imports the package: each oracle is a short, direct
calculation that can be checked by eye.
"""

import itertools
import math
from fractions import Fraction


def h(probs):
    return -sum(p * math.log(p) for p in probs if p > 0)


def markov_segment_entropy(flip, n):
    """Entropy of n sites of the symmetric binary chain, by enumerating words."""
    total = 0.0
    for word in itertools.product((0, 1), repeat=n):
        p = 0.5
        for a, b in zip(word, word[1:]):
            p *= flip if a != b else 1 - flip
        total -= p * math.log(p)
    return total


def ghz_marginal_entropy(n, m):
    """A GHZ marginal on m < n sites is (|0..0><0..0| + |1..1><1..1|)/2."""
    return math.log(2) if m < n else 0.0


def farkas_combination(constraints, multipliers):
    """Sum of lambda_j g_j as a dict, in exact arithmetic."""
    out = {}
    for j, lam in multipliers:
        for i, v in constraints[j]:
            out[i] = out.get(i, Fraction(0)) + Fraction(lam) * v
    return {i: v for i, v in out.items() if v}
