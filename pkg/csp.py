"""
Common Spatial Patterns sobre series de potencia (diferenciadas) por banda.

Los filtros resuelven el problema generalizado Σa w = λ (Σa + Σb) w; las
características por ensayo son log(var_j / Σ var_k) de cada componente
proyectada a lo largo de las ventanas.
"""
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

import config
from dsp import BandPowerSeries, WaveBand, get_band
from errors import ConfigError, DimensionError, InsufficientDataError, NumericalError, TooShortError

SeriesInput = Union[np.ndarray, Sequence[BandPowerSeries]]


@dataclass(frozen=True)
class CspModel:
    band: WaveBand
    filters: np.ndarray          # m x canales
    n_components: int
    class_pair: Tuple[int, Optional[int]]  # (a, b); b = None significa "resto"
    eigenvalues: np.ndarray

    @property
    def n_channels(self) -> int:
        return int(self.filters.shape[1])

    def to_dict(self) -> dict:
        return {
            'band': self.band.name,
            'filters': self.filters.tolist(),
            'n_components': self.n_components,
            'class_pair': [self.class_pair[0], self.class_pair[1]],
            'eigenvalues': self.eigenvalues.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'CspModel':
        filters = np.asarray(data['filters'], dtype=float)
        if filters.ndim != 2:
            raise DimensionError(f"CSP filters must be a matrix, got shape {filters.shape}")
        pair = data['class_pair']
        return cls(
            band=get_band(data['band']),
            filters=filters,
            n_components=int(data['n_components']),
            class_pair=(int(pair[0]), None if pair[1] is None else int(pair[1])),
            eigenvalues=np.asarray(data['eigenvalues'], dtype=float),
        )


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    band: WaveBand
    trial_id: Optional[int] = None


def _as_array(series: SeriesInput) -> np.ndarray:
    if isinstance(series, np.ndarray):
        arr = series.astype(float, copy=False)
    else:
        arr = np.stack([s.power if isinstance(s, BandPowerSeries) else np.asarray(s) for s in series])
    if arr.ndim == 2:
        arr = arr[None]
    if arr.shape[-1] < 2:
        raise TooShortError(f"CSP needs at least 2 windows per trial, got {arr.shape[-1]}")
    return arr


def trial_covariances(series: SeriesInput) -> np.ndarray:
    """Covarianza espacial de cada ensayo normalizada por su traza: (n, C, C)."""
    arr = _as_array(series)
    centred = arr - arr.mean(axis=-1, keepdims=True)
    covs = np.einsum('ncw,ndw->ncd', centred, centred)
    traces = np.trace(covs, axis1=1, axis2=2)
    # Ensayo plano: se deja sin normalizar (matriz nula)
    scale = np.where(traces > 0, traces, 1.0)
    return covs / scale[:, None, None]


def class_covariance(
    series: SeriesInput,
    labels: Sequence[int],
    target,
    ridge: Optional[float] = None,
) -> np.ndarray:
    """
    Media de las covarianzas normalizadas de los ensayos de una clase, más ridge·I.

    target puede ser una etiqueta o una máscara booleana sobre los ensayos.
    """
    ridge = config.COV_RIDGE if ridge is None else ridge
    arr = _as_array(series)
    labels = np.asarray(labels)
    mask = np.asarray(target) if np.ndim(target) else labels == target
    if not np.any(mask):
        raise InsufficientDataError(f"no training trials for class {target!r}")
    covs = trial_covariances(arr[mask])
    return covs.mean(axis=0) + ridge * np.eye(arr.shape[1])


def component_count(band, channels: int, overrides: Optional[Dict[str, int]] = None) -> int:
    """Componentes pedidas para la banda, recortadas al número de canales."""
    name = band.name if isinstance(band, WaveBand) else str(band)
    counts = overrides if overrides is not None else config.CSP_COMPONENTS
    return max(1, min(int(counts.get(name, channels)), channels))


def _select_alternating(eigvals: np.ndarray, m: int) -> List[int]:
    # Alterna extremos del espectro: mayor, menor, segundo mayor, ...
    descending = np.argsort(-eigvals, kind='stable')
    ascending = descending[::-1]
    return [int(descending[i // 2]) if i % 2 == 0 else int(ascending[i // 2]) for i in range(m)]


def _fix_signs(filters: np.ndarray) -> np.ndarray:
    filters = filters.copy()
    for row in filters:
        nonzero = np.flatnonzero(np.abs(row) > 1e-12)
        if nonzero.size and row[nonzero[0]] < 0:
            row *= -1.0
    return filters


def _fit_pair(
    arr: np.ndarray,
    mask_a: np.ndarray,
    mask_b: np.ndarray,
    band: WaveBand,
    n_components: int,
    class_pair: Tuple[int, Optional[int]],
) -> CspModel:
    if n_components < 1:
        raise ConfigError(f"n_components must be >= 1, got {n_components}")
    sigma_a = class_covariance(arr, None, mask_a)
    sigma_b = class_covariance(arr, None, mask_b)
    try:
        eigvals, vectors = linalg.eigh(sigma_a, sigma_a + sigma_b)
    except linalg.LinAlgError as exc:
        raise NumericalError(f"CSP composite covariance for band '{band.name}' is singular: {exc}") from exc
    if not np.all(np.isfinite(vectors)):
        raise NumericalError(f"CSP eigen-decomposition for band '{band.name}' produced non-finite filters")
    m = min(n_components, arr.shape[1])
    selected = _select_alternating(eigvals, m)
    return CspModel(
        band=band,
        filters=_fix_signs(vectors[:, selected].T),
        n_components=m,
        class_pair=class_pair,
        eigenvalues=eigvals[selected],
    )


def fit_csp(
    series: SeriesInput,
    labels: Sequence[int],
    band: WaveBand,
    n_components: int,
) -> CspModel:
    """
    CSP de dos clases.

    Args:
        series: series diferenciadas (ensayos, canales, ventanas) o lista de BandPowerSeries
        labels: etiqueta de cada ensayo (exactamente dos clases)
        band: banda de origen de las series
        n_components: componentes pedidas (se recortan al número de canales)

    Returns:
        CspModel con ⌈m/2⌉ filtros del extremo superior y ⌊m/2⌋ del inferior
    """
    arr = _as_array(series)
    labels = np.asarray(labels)
    present = np.unique(labels)
    if present.size < 2:
        raise InsufficientDataError(f"CSP needs two classes, found {present.tolist()}")
    if present.size > 2:
        raise ConfigError(f"fit_csp takes exactly two classes, found {present.size}; use fit_csp_ovr")
    a, b = int(present[0]), int(present[1])
    return _fit_pair(arr, labels == a, labels == b, band, n_components, (a, b))


def fit_csp_ovr(
    series: SeriesInput,
    labels: Sequence[int],
    band: WaveBand,
    n_components: int,
    n_classes: Optional[int] = None,
) -> List[CspModel]:
    """Uno-contra-resto; con dos clases devuelve un único modelo igual a fit_csp."""
    arr = _as_array(series)
    labels = np.asarray(labels)
    classes = list(range(n_classes)) if n_classes else sorted(int(c) for c in np.unique(labels))
    if len(classes) < 2:
        raise InsufficientDataError(f"CSP needs at least two classes, found {classes}")
    missing = [c for c in classes if not np.any(labels == c)]
    if missing:
        raise InsufficientDataError(f"classes {missing} have no training trials for band '{band.name}'")
    if len(classes) == 2:
        a, b = classes
        return [_fit_pair(arr, labels == a, labels == b, band, n_components, (a, b))]
    return [
        _fit_pair(arr, labels == c, labels != c, band, n_components, (c, None))
        for c in classes
    ]


def fit_band(
    series: SeriesInput,
    labels: Sequence[int],
    band: WaveBand,
    n_components: Optional[int] = None,
    n_classes: Optional[int] = None,
) -> List[CspModel]:
    """Modelos CSP de una banda: par único con dos clases, uno-contra-resto con más."""
    arr = _as_array(series)
    if n_components is None:
        n_components = component_count(band, arr.shape[1])
    return fit_csp_ovr(arr, labels, band, n_components, n_classes)


def transform_batch(models: Union[CspModel, Sequence[CspModel]], series: SeriesInput) -> np.ndarray:
    """Características log-varianza de muchos ensayos: (n, Σ m)."""
    if isinstance(models, CspModel):
        models = [models]
    arr = _as_array(series)
    blocks = []
    for model in models:
        if arr.shape[1] != model.n_channels:
            raise DimensionError(
                f"series has {arr.shape[1]} channels but the CSP model expects {model.n_channels}"
            )
        projected = np.einsum('mc,ncw->nmw', model.filters, arr)
        variances = np.maximum(projected.var(axis=-1), config.LOG_VAR_FLOOR)
        blocks.append(np.log(variances / variances.sum(axis=-1, keepdims=True)))
    return np.concatenate(blocks, axis=-1)


def transform(
    models: Union[CspModel, Sequence[CspModel]],
    series: Union[BandPowerSeries, np.ndarray],
    trial_id: Optional[int] = None,
) -> FeatureVector:
    first = models if isinstance(models, CspModel) else models[0]
    power = series.power if isinstance(series, BandPowerSeries) else np.asarray(series, dtype=float)
    if power.ndim != 2:
        raise DimensionError(f"a single trial series must be channels x windows, got {power.shape}")
    values = transform_batch(models, power[None])[0]
    return FeatureVector(values=values, band=first.band, trial_id=trial_id)


def top_filter_variance_ratio(model: CspModel, series_a: SeriesInput, series_b: SeriesInput) -> float:
    """Cociente de varianza proyectada (clase a : clase b) del primer filtro."""
    w = model.filters[0]
    var_a = np.mean([np.var(w @ x) for x in _as_array(series_a)])
    var_b = np.mean([np.var(w @ x) for x in _as_array(series_b)])
    return float(var_a / max(var_b, math.ulp(0.0)))
