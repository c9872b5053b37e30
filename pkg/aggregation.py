"""
Catálogo de funciones de agregación n-arias sobre vectores del intervalo unidad.

Incluye las clásicas (media, mediana, mínimo, máximo), las integrales de
Choquet y Sugeno con sus generalizaciones (CF, C_{F1,F2}, Sugeno-Hamacher,
F-Sugeno), los operadores OWA y las funciones de solapamiento n-arias.

Todas trabajan sobre el último eje del array, de modo que la fusión puede
agregar de una vez todos los ensayos y todas las clases. Un vector 1-D
devuelve un float.
"""
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

import config
from errors import (
    ConfigError,
    InvalidArityError,
    InvalidMeasureError,
    InvalidQuantifierError,
    OutOfRangeError,
)

# Margen numérico admitido fuera de [0,1] antes de recortar
_CLIP_TOL = 1e-9
_SUM_TOL = 1e-12

ArrayLike = Union[np.ndarray, list, tuple, float]


class AggregatorId(str, Enum):
    """Los 17 operadores de la tabla de pares de agregación, con su token serializado."""
    MEAN = 'mean'
    MEDIAN = 'median'
    CHOQUET = 'choquet'
    CF_MM = 'cf_mm'
    SUGENO = 'sugeno'
    HAMACHER_SUGENO = 'h_sugeno'
    F_SUGENO = 'f_sugeno'
    MIN = 'min'
    MAX = 'max'
    CF1F2 = 'cf1f2'
    OWA1 = 'owa1'
    OWA2 = 'owa2'
    OWA3 = 'owa3'
    CF = 'cf'
    GM = 'gm'
    SO = 'so'
    HM = 'hm'

    @classmethod
    def parse(cls, token) -> 'AggregatorId':
        if isinstance(token, cls):
            return token
        try:
            return cls(str(token).strip().lower())
        except ValueError:
            valid = ', '.join(a.value for a in cls)
            raise ConfigError(f"unknown aggregator '{token}' (valid: {valid})") from None


AGGREGATORS = tuple(AggregatorId)


@dataclass(frozen=True)
class FuzzyMeasure:
    """
    Medida difusa simétrica (cardinal): m depende solo del tamaño del subconjunto.

    values[k] = m(A) para |A| = k, k = 0..n
    """
    n: int
    values: Tuple[float, ...]

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArityError(f"fuzzy measure needs n >= 1, got {self.n}")
        if len(self.values) != self.n + 1:
            raise InvalidMeasureError(
                f"measure over {self.n} sources needs {self.n + 1} values, got {len(self.values)}"
            )
        if self.values[0] != 0.0 or self.values[-1] != 1.0:
            raise InvalidMeasureError("boundary conditions m(0)=0 and m(n)=1 violated")
        if any(b < a for a, b in zip(self.values, self.values[1:])):
            raise InvalidMeasureError("fuzzy measure must be nondecreasing in cardinality")
        if any(v < 0.0 or v > 1.0 for v in self.values):
            raise InvalidMeasureError("fuzzy measure values must lie in [0,1]")

    @classmethod
    def from_values(cls, values) -> 'FuzzyMeasure':
        values = tuple(float(v) for v in values)
        return cls(n=len(values) - 1, values=values)

    def tail_measures(self) -> np.ndarray:
        """m(A_i) para i = 1..n, con A_i = {i, ..., n} (|A_i| = n - i + 1)."""
        return np.asarray(self.values[:0:-1], dtype=float)


@dataclass(frozen=True)
class SortedInput:
    """Entrada ordenada de forma ascendente junto a la permutación y las medidas de cola."""
    sorted: np.ndarray
    perm: np.ndarray
    tail_measures: np.ndarray

    @property
    def previous(self) -> np.ndarray:
        """x_{σ(i-1)} con el convenio x_{σ(0)} = 0."""
        zeros = np.zeros(self.sorted.shape[:-1] + (1,))
        return np.concatenate([zeros, self.sorted[..., :-1]], axis=-1)

    @property
    def increments(self) -> np.ndarray:
        return self.sorted - self.previous


@dataclass(frozen=True)
class OwaWeights:
    a: float
    b: float
    weights: Tuple[float, ...]

    def __post_init__(self):
        if abs(sum(self.weights) - 1.0) > _SUM_TOL:
            raise InvalidQuantifierError(f"OWA weights sum to {sum(self.weights)!r}, not 1")
        if any(w < 0.0 or w > 1.0 for w in self.weights):
            raise InvalidQuantifierError("OWA weights must lie in [0,1]")


def _finish(value):
    value = np.asarray(value, dtype=float)
    if value.ndim == 0:
        return float(value)
    return value


def as_unit_vector(x: ArrayLike) -> np.ndarray:
    """
    Valida un UnitVector (o un lote de ellos en el último eje).

    Valores a menos de 1e-9 fuera de [0,1] se recortan; el resto se rechaza.
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.shape[-1] < 1:
        raise InvalidArityError("aggregation input must have at least one element")
    if not np.all(np.isfinite(arr)):
        raise OutOfRangeError("aggregation input contains non-finite values")
    if np.any(arr < -_CLIP_TOL) or np.any(arr > 1.0 + _CLIP_TOL):
        raise OutOfRangeError(
            f"aggregation input outside [0,1]: min={arr.min()!r}, max={arr.max()!r}"
        )
    return np.clip(arr, 0.0, 1.0)


@lru_cache(maxsize=64)
def cardinal_measure(n: int) -> FuzzyMeasure:
    """Medida cardinal lineal m(k) = k/n."""
    if n < 1:
        raise InvalidArityError(f"cardinal measure needs n >= 1, got {n}")
    return FuzzyMeasure(n=n, values=tuple(k / n for k in range(n + 1)))


def sort_input(x: ArrayLike, m: Optional[FuzzyMeasure] = None) -> SortedInput:
    arr = as_unit_vector(x)
    n = arr.shape[-1]
    if m is None:
        m = cardinal_measure(n)
    if m.n != n:
        raise InvalidArityError(f"input has {n} sources but the measure is defined over {m.n}")
    # Orden estable: los empates se resuelven por índice original
    perm = np.argsort(arr, axis=-1, kind='stable')
    return SortedInput(
        sorted=np.take_along_axis(arr, perm, axis=-1),
        perm=perm,
        tail_measures=m.tail_measures(),
    )


def _hamacher(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    num = x * y
    den = x + y - num
    out = np.zeros(np.broadcast(x, y).shape)
    return np.divide(num, den, out=out, where=den > 0)


def hamacher_tnorm(x, y):
    """T-norma de Hamacher: 0 si x = y = 0, si no xy / (x + y - xy)."""
    return _finish(_hamacher(x, y))


BINARY_FUSIONS: Dict[str, Callable] = {
    'product': np.multiply,
    'min': np.minimum,
    'hamacher': _hamacher,
}


def choquet(x: ArrayLike, m: Optional[FuzzyMeasure] = None):
    s = sort_input(x, m)
    return _finish(np.sum(s.increments * s.tail_measures, axis=-1))


def cf_hamacher(x: ArrayLike, m: Optional[FuzzyMeasure] = None):
    """Integral CF: el producto de Choquet sustituido por la T-norma de Hamacher."""
    s = sort_input(x, m)
    total = np.sum(_hamacher(s.increments, s.tail_measures), axis=-1)
    return _finish(np.clip(total, 0.0, 1.0))


def cf1f2(
    x: ArrayLike,
    m: Optional[FuzzyMeasure] = None,
    f1: str = 'product',
    f2: str = 'min',
):
    """Generalización C_{F1,F2}: Σ F1(x_σ(i), m(A_i)) - F2(x_σ(i-1), m(A_i))."""
    try:
        fn1, fn2 = BINARY_FUSIONS[f1], BINARY_FUSIONS[f2]
    except KeyError as exc:
        raise ConfigError(
            f"unknown fusion function {exc.args[0]!r} (valid: {', '.join(BINARY_FUSIONS)})"
        ) from None
    s = sort_input(x, m)
    terms = fn1(s.sorted, s.tail_measures) - fn2(s.previous, s.tail_measures)
    return _finish(np.clip(np.sum(terms, axis=-1), 0.0, 1.0))


def sugeno(x: ArrayLike, m: Optional[FuzzyMeasure] = None):
    s = sort_input(x, m)
    return _finish(np.max(np.minimum(s.sorted, s.tail_measures), axis=-1))


def sugeno_hamacher(x: ArrayLike, m: Optional[FuzzyMeasure] = None):
    s = sort_input(x, m)
    return _finish(np.max(_hamacher(s.sorted, s.tail_measures), axis=-1))


def sugeno_f(x: ArrayLike, m: Optional[FuzzyMeasure] = None):
    """F-Sugeno: Sugeno con la T-norma producto en lugar del mínimo."""
    s = sort_input(x, m)
    return _finish(np.max(s.sorted * s.tail_measures, axis=-1))


def owa_weights(a: float, b: float, n: int) -> OwaWeights:
    """
    Pesos OWA a partir del cuantificador lineal por tramos Q_{a,b}.

    Args:
        a: inicio de la rampa del cuantificador
        b: fin de la rampa (a < b)
        n: número de valores a agregar

    Returns:
        OwaWeights con w_i = Q(i/n) - Q((i-1)/n)
    """
    if not (0.0 <= a < b <= 1.0):
        raise InvalidQuantifierError(f"quantifier needs 0 <= a < b <= 1, got a={a}, b={b}")
    if n < 1:
        raise InvalidArityError(f"OWA weights need n >= 1, got {n}")
    ratios = np.arange(n + 1) / n
    q = np.clip((ratios - a) / (b - a), 0.0, 1.0)
    return OwaWeights(a=a, b=b, weights=tuple(float(w) for w in np.diff(q)))


def owa(x: ArrayLike, w: OwaWeights):
    arr = as_unit_vector(x)
    weights = np.asarray(w.weights, dtype=float)
    if arr.shape[-1] != weights.size:
        raise InvalidArityError(f"input has {arr.shape[-1]} values but {weights.size} OWA weights")
    descending = np.sort(arr, axis=-1)[..., ::-1]
    return _finish(np.sum(descending * weights, axis=-1))


def overlap(x: ArrayLike, kind):
    """Solapamientos n-arios: HM, SO, GM y mínimo."""
    kind = AggregatorId.parse(kind)
    arr = as_unit_vector(x)
    n = arr.shape[-1]
    if kind is AggregatorId.HM:
        # Límite continuo: cualquier cero anula la media armónica
        has_zero = np.any(arr == 0.0, axis=-1)
        safe = np.where(arr > 0.0, arr, 1.0)
        value = np.where(has_zero, 0.0, n / np.sum(1.0 / safe, axis=-1))
    elif kind is AggregatorId.SO:
        value = np.sin(math.pi / 2.0 * np.prod(arr, axis=-1))
    elif kind is AggregatorId.GM:
        value = np.prod(arr, axis=-1) ** (1.0 / n)
    elif kind is AggregatorId.MIN:
        value = np.min(arr, axis=-1)
    else:
        raise ConfigError(f"'{kind.value}' is not an overlap function")
    return _finish(value)


def classical(x: ArrayLike, kind):
    kind = AggregatorId.parse(kind)
    arr = as_unit_vector(x)
    if kind is AggregatorId.MEAN:
        value = np.mean(arr, axis=-1)
    elif kind is AggregatorId.MEDIAN:
        # Longitud par: punto medio de los dos estadísticos centrales
        value = np.median(arr, axis=-1)
    elif kind is AggregatorId.MIN:
        value = np.min(arr, axis=-1)
    elif kind is AggregatorId.MAX:
        value = np.max(arr, axis=-1)
    else:
        raise ConfigError(f"'{kind.value}' is not a classical aggregation")
    return _finish(value)


@lru_cache(maxsize=128)
def _owa_for(agg_id: AggregatorId, n: int) -> OwaWeights:
    a, b = config.OWA_QUANTIFIERS[agg_id.value]
    return owa_weights(a, b, n)


_DISPATCH: Dict[AggregatorId, Callable] = {
    AggregatorId.MEAN: lambda x: classical(x, AggregatorId.MEAN),
    AggregatorId.MEDIAN: lambda x: classical(x, AggregatorId.MEDIAN),
    AggregatorId.CHOQUET: choquet,
    AggregatorId.CF_MM: lambda x: cf1f2(x, None, 'min', 'min'),
    AggregatorId.SUGENO: sugeno,
    AggregatorId.HAMACHER_SUGENO: sugeno_hamacher,
    AggregatorId.F_SUGENO: sugeno_f,
    AggregatorId.MIN: lambda x: classical(x, AggregatorId.MIN),
    AggregatorId.MAX: lambda x: classical(x, AggregatorId.MAX),
    AggregatorId.CF1F2: lambda x: cf1f2(x, None, *config.CF1F2_PAIR),
    AggregatorId.OWA1: lambda x: owa(x, _owa_for(AggregatorId.OWA1, np.shape(x)[-1])),
    AggregatorId.OWA2: lambda x: owa(x, _owa_for(AggregatorId.OWA2, np.shape(x)[-1])),
    AggregatorId.OWA3: lambda x: owa(x, _owa_for(AggregatorId.OWA3, np.shape(x)[-1])),
    AggregatorId.CF: cf_hamacher,
    AggregatorId.GM: lambda x: overlap(x, AggregatorId.GM),
    AggregatorId.SO: lambda x: overlap(x, AggregatorId.SO),
    AggregatorId.HM: lambda x: overlap(x, AggregatorId.HM),
}


def aggregate(agg_id, x: ArrayLike):
    """
    Punto de entrada uniforme: agrega x (último eje) con el operador indicado.

    La medida cardinal y los pesos OWA se construyen para n = len(x).
    El resultado se recorta a [0,1].
    """
    agg_id = AggregatorId.parse(agg_id)
    arr = as_unit_vector(x)
    return _finish(np.clip(_DISPATCH[agg_id](arr), 0.0, 1.0))
