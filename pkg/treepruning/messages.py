import math

from .exceptions import TreeArithmeticError

#: Relative tolerance of the concatenation consistency check
CONSISTENCY_TOLERANCE = 1e-9


class WeightPair(object):
    """
    Pair (w(0), w(1)) = (m0, m1) * 2**exponent. After every operation the
    larger mantissa magnitude lies in [0.5, 1), unless both are zero.
    """

    __slots__ = ('m0', 'm1', 'exponent')

    def __init__(self, m0, m1, exponent=0):
        m0 = float(m0)
        m1 = float(m1)
        if not (math.isfinite(m0) and math.isfinite(m1)):
            raise TreeArithmeticError('weight pair entries must be finite')
        peak = max(abs(m0), abs(m1))
        if peak == 0.0:
            self.m0 = self.m1 = 0.0
            self.exponent = 0
            return
        shift = math.frexp(peak)[1]
        self.m0 = math.ldexp(m0, -shift)
        self.m1 = math.ldexp(m1, -shift)
        self.exponent = int(exponent) + shift

    @classmethod
    def indicator(cls, bit):
        return cls(1.0 if bit == 0 else 0.0, 1.0 if bit == 1 else 0.0)

    def __getitem__(self, x):
        return self.m1 if x else self.m0

    def __mul__(self, other):
        return WeightPair(self.m0 * other.m0, self.m1 * other.m1, self.exponent + other.exponent)

    def __repr__(self):
        return 'WeightPair(%r, %r, exponent=%d)' % (self.m0, self.m1, self.exponent)

    @property
    def is_zero(self):
        return self.m0 == 0.0 and self.m1 == 0.0

    def mantissas(self):
        return self.m0, self.m1

    def values(self):
        """
        Unscaled entries; may overflow to inf or underflow to 0 for deep trees.
        """
        return math.ldexp(self.m0, self.exponent), math.ldexp(self.m1, self.exponent)

    def transform(self, table):
        """
        Edge update: w'(x_u) = sum over x_v of table[x_u][x_v] * w(x_v).

        :param table: 2x2 nested sequence indexed [x_u][x_v]
        :returns: A WeightPair
        """
        return WeightPair(table[0][0] * self.m0 + table[0][1] * self.m1,
                          table[1][0] * self.m0 + table[1][1] * self.m1,
                          self.exponent)

    def normalized(self):
        """
        Probability pair (p0, p1) summing to 1; entries may be negative for
        signed pairs. Raises ZeroDivisionError when the entries cancel.
        """
        total = self.m0 + self.m1
        return self.m0 / total, self.m1 / total


#: The pair type as it appears in marginal computations
MarginalPair = WeightPair

def align(first, second):
    """
    Mantissas of two pairs rescaled to the larger of the two exponents.

    :returns: ((a0, a1), (b0, b1), exponent)
    """
    exponent = max(first.exponent, second.exponent)
    a = first.exponent - exponent
    b = second.exponent - exponent
    return ((math.ldexp(first.m0, a), math.ldexp(first.m1, a)),
            (math.ldexp(second.m0, b), math.ldexp(second.m1, b)),
            exponent)


def concatenate(first, last):
    """
    Block combination: 0-entry of the first child, 1-entry of the last child.
    """
    (a0, _), (_, b1), exponent = align(first, last)
    return WeightPair(a0, b1, exponent)


def consistency_gap(left, right):
    """
    Relative mismatch between left(1) and right(0) at matched exponents,
    measured against the largest entry of either pair.
    """
    (a0, a1), (b0, b1), _ = align(left, right)
    scale = max(abs(a0), abs(a1), abs(b0), abs(b1))
    if scale == 0.0:
        return 0.0
    return abs(a1 - b0) / scale
