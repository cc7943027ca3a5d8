"""Forward-mode dual numbers over numpy arrays.

A ``Dual`` carries a value array of shape ``S`` and a partials array of
shape ``S + (k,)``: the derivative of every value entry with respect to
``k`` seeded inputs. Arithmetic broadcasts like numpy on the value shape.

The module-level functions (``sin``, ``exp``, ...) accept plain floats and
arrays as well, so model code can be written once and evaluated either
numerically or with derivatives.
"""

from typing import Callable, List, Sequence, Tuple, Union

import numpy as np

Number = Union[float, np.ndarray, 'Dual']


def _broadcast_partials(partials: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    return np.broadcast_to(partials, shape + partials.shape[-1:])


class Dual:
    __slots__ = ('value', 'partials')
    # numpy must hand mixed operations back to the Dual operators
    __array_ufunc__ = None

    def __init__(self, value, partials):
        self.value = np.asarray(value, dtype=float)
        self.partials = np.asarray(partials, dtype=float)
        if self.partials.shape[:-1] != self.value.shape:
            self.partials = _broadcast_partials(self.partials, self.value.shape)

    @property
    def nvars(self) -> int:
        return self.partials.shape[-1]

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @classmethod
    def constant(cls, value, nvars: int) -> 'Dual':
        value = np.asarray(value, dtype=float)
        return cls(value, np.zeros(value.shape + (nvars,)))

    @classmethod
    def variables(cls, values: Sequence) -> List['Dual']:
        """Seed each input with its own unit direction"""
        k = len(values)
        seeded = []
        for i, v in enumerate(values):
            v = np.asarray(v, dtype=float)
            partials = np.zeros(v.shape + (k,))
            partials[..., i] = 1.0
            seeded.append(cls(v, partials))
        return seeded

    @staticmethod
    def chain(value, derivatives: Sequence, inputs: Sequence['Dual']) -> 'Dual':
        """Build f(inputs) from its value and its partials with respect to each input"""
        value = np.asarray(value, dtype=float)
        partials = None
        for d, x in zip(derivatives, inputs):
            if not isinstance(x, Dual):
                continue
            term = np.asarray(d, dtype=float)[..., None] * x.partials
            partials = term if partials is None else partials + term
        if partials is None:
            return value
        return Dual(value, _broadcast_partials(partials, value.shape))

    def __repr__(self) -> str:
        return f'Dual(value={self.value!r}, partials={self.partials!r})'

    def __getitem__(self, item) -> 'Dual':
        # leading-axis indexing only; the trailing partials axis rides along
        return Dual(self.value[item], self.partials[item])

    def __neg__(self) -> 'Dual':
        return Dual(-self.value, -self.partials)

    def __pos__(self) -> 'Dual':
        return self

    def __add__(self, other) -> 'Dual':
        if isinstance(other, Dual):
            value = self.value + other.value
            return Dual(value, _broadcast_partials(self.partials, value.shape)
                        + _broadcast_partials(other.partials, value.shape))
        value = self.value + np.asarray(other, dtype=float)
        return Dual(value, _broadcast_partials(self.partials, value.shape))

    __radd__ = __add__

    def __sub__(self, other) -> 'Dual':
        return self + (-other)

    def __rsub__(self, other) -> 'Dual':
        return (-self) + other

    def __mul__(self, other) -> 'Dual':
        if isinstance(other, Dual):
            value = self.value * other.value
            partials = (self.partials * other.value[..., None]
                        + self.value[..., None] * other.partials)
            return Dual(value, partials)
        other = np.asarray(other, dtype=float)
        return Dual(self.value * other, self.partials * other[..., None])

    __rmul__ = __mul__

    def __truediv__(self, other) -> 'Dual':
        if isinstance(other, Dual):
            value = self.value / other.value
            partials = (self.partials - value[..., None] * other.partials) / other.value[..., None]
            return Dual(value, partials)
        other = np.asarray(other, dtype=float)
        return Dual(self.value / other, self.partials / other[..., None])

    def __rtruediv__(self, other) -> 'Dual':
        other = np.asarray(other, dtype=float)
        value = other / self.value
        return Dual(value, -(value / self.value)[..., None] * self.partials)

    def __rmatmul__(self, matrix) -> 'Dual':
        matrix = np.asarray(matrix, dtype=float)
        return Dual(matrix @ self.value, matrix @ self.partials)

    def sum(self) -> 'Dual':
        return Dual(self.value.sum(), self.partials.reshape(-1, self.nvars).sum(axis=0))

    def __pow__(self, exponent) -> 'Dual':
        if isinstance(exponent, Dual):
            return exp(exponent * log(self))
        exponent = float(exponent)
        if exponent == 2.0:
            return self * self
        value = self.value ** exponent
        return Dual(value, (exponent * self.value ** (exponent - 1.0))[..., None] * self.partials)


def value_of(x: Number) -> np.ndarray:
    return x.value if isinstance(x, Dual) else np.asarray(x, dtype=float)


def partials_of(x: Number, nvars: int) -> np.ndarray:
    if isinstance(x, Dual):
        return x.partials
    x = np.asarray(x, dtype=float)
    return np.zeros(x.shape + (nvars,))


def _unary(x: Number, f: Callable, df: Callable) -> Number:
    if isinstance(x, Dual):
        return Dual(f(x.value), df(x.value)[..., None] * x.partials)
    return f(np.asarray(x, dtype=float))


def sin(x: Number) -> Number:
    return _unary(x, np.sin, np.cos)


def cos(x: Number) -> Number:
    return _unary(x, np.cos, lambda v: -np.sin(v))


def tan(x: Number) -> Number:
    return _unary(x, np.tan, lambda v: 1.0 / np.cos(v) ** 2)


def exp(x: Number) -> Number:
    return _unary(x, np.exp, np.exp)


def log(x: Number) -> Number:
    return _unary(x, np.log, lambda v: 1.0 / v)


def sqrt(x: Number) -> Number:
    return _unary(x, np.sqrt, lambda v: 0.5 / np.sqrt(v))


def arcsin(x: Number) -> Number:
    return _unary(x, np.arcsin, lambda v: 1.0 / np.sqrt(1.0 - v * v))


def arctan2(y: Number, x: Number) -> Number:
    yv, xv = value_of(y), value_of(x)
    value = np.arctan2(yv, xv)
    if not isinstance(y, Dual) and not isinstance(x, Dual):
        return value
    r2 = xv * xv + yv * yv
    return Dual.chain(value, [xv / r2, -yv / r2], [y, x])


def jacobian(f: Callable[[Dual], Number], x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Value and dense Jacobian of a vector function of a flat vector"""
    x = np.asarray(x, dtype=float).ravel()
    seeded = Dual(x, np.eye(x.size))
    out = f(seeded)
    if not isinstance(out, Dual):
        out = np.atleast_1d(np.asarray(out, dtype=float))
        return out, np.zeros(out.shape + (x.size,))
    return np.atleast_1d(out.value), out.partials.reshape(-1, x.size)


def stack(items: Sequence[Number], nvars: int) -> Dual:
    """Stack duals (or constants) along a new last value axis"""
    values = np.stack([value_of(i) for i in items], axis=-1)
    partials = np.stack([_broadcast_partials(partials_of(i, nvars), value_of(i).shape)
                         for i in items], axis=-2)
    return Dual(values, partials)
