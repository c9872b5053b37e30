"""
Motor de decisión en dos fases del EMF.

1) Fase de frecuencia: para cada tipo de clasificador se agregan, clase a
   clase, las salidas de todas sus bandas -> un vector colectivo por tipo.
2) Fase de clasificador: se agregan los vectores colectivos -> puntuación final.
La decisión es la clase con mayor valor (empates -> índice menor).

Modos: 'traditional' (media de todas las salidas), 'mff' (mismo agregador
en ambas fases) y 'emf' (agregador libre en cada fase).
"""
from dataclasses import dataclass
from enum import Enum
from threading import Lock
from typing import Iterable, Optional, Tuple, Union

import numpy as np

import config
from aggregation import AggregatorId, aggregate
from classifiers import CLASSIFIERS, ClassifierId
from errors import ConfigError, DimensionError

_SUM_TOL = 1e-9

# Contador de ensayos cuya agregación dio el vector nulo (se sustituye por uniforme)
_FALLBACK_COUNT = 0
_FALLBACK_LOCK = Lock()

_BAND_ORDER = list(config.WAVE_BANDS)


class FusionMode(str, Enum):
    TRADITIONAL = 'traditional'
    MFF = 'mff'
    EMF = 'emf'

    @classmethod
    def parse(cls, token) -> 'FusionMode':
        if isinstance(token, cls):
            return token
        try:
            return cls(str(token).strip().lower())
        except ValueError:
            raise ConfigError(f"unknown fusion mode '{token}' (valid: traditional, mff, emf)") from None


def _ordered_bands(bands: Iterable[str]) -> Tuple[str, ...]:
    names = []
    for band in bands:
        name = getattr(band, 'name', band)
        name = str(name).strip().lower()
        if name not in config.WAVE_BANDS:
            raise ConfigError(f"unknown band '{band}' (valid: {', '.join(config.WAVE_BANDS)})")
        if name not in names:
            names.append(name)
    return tuple(sorted(names, key=_BAND_ORDER.index))


def _ordered_classifiers(classifiers: Iterable) -> Tuple[ClassifierId, ...]:
    ids = []
    for token in classifiers:
        clf = ClassifierId.parse(token)
        if clf not in ids:
            ids.append(clf)
    return tuple(sorted(ids, key=CLASSIFIERS.index))


@dataclass(frozen=True)
class FusionConfig:
    bands: Tuple[str, ...]
    classifiers: Tuple[ClassifierId, ...]
    freq_agg: AggregatorId = AggregatorId.MEAN
    class_agg: AggregatorId = AggregatorId.MEAN
    mode: FusionMode = FusionMode.EMF

    def __post_init__(self):
        # Normaliza tokens y orden de catálogo
        object.__setattr__(self, 'bands', _ordered_bands(self.bands))
        object.__setattr__(self, 'classifiers', _ordered_classifiers(self.classifiers))
        object.__setattr__(self, 'freq_agg', AggregatorId.parse(self.freq_agg))
        object.__setattr__(self, 'class_agg', AggregatorId.parse(self.class_agg))
        object.__setattr__(self, 'mode', FusionMode.parse(self.mode))
        if not self.bands:
            raise ConfigError("fusion config needs at least one band")
        if not self.classifiers:
            raise ConfigError("fusion config needs at least one classifier")
        if self.mode is FusionMode.MFF and self.freq_agg is not self.class_agg:
            raise ConfigError(
                f"mff requires equal aggregators (freq_agg={self.freq_agg.value}, "
                f"class_agg={self.class_agg.value})"
            )

    def to_dict(self) -> dict:
        return {
            'mode': self.mode.value,
            'bands': list(self.bands),
            'classifiers': [c.value for c in self.classifiers],
            'freq_agg': self.freq_agg.value,
            'class_agg': self.class_agg.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'FusionConfig':
        return cls(
            bands=tuple(data['bands']),
            classifiers=tuple(data['classifiers']),
            freq_agg=data.get('freq_agg', 'mean'),
            class_agg=data.get('class_agg', 'mean'),
            mode=data.get('mode', 'emf'),
        )


@dataclass(frozen=True)
class ScoreTensor:
    """scores[banda][clasificador][ensayo][clase], cada vector de clases es un ScoreVector."""
    scores: np.ndarray
    bands: Tuple[str, ...]
    classifiers: Tuple[ClassifierId, ...]

    def __post_init__(self):
        object.__setattr__(self, 'classifiers', tuple(ClassifierId.parse(c) for c in self.classifiers))
        if self.scores.ndim != 4:
            raise DimensionError(f"score tensor must be bands x classifiers x trials x classes, got {self.scores.shape}")
        if self.scores.shape[:2] != (len(self.bands), len(self.classifiers)):
            raise DimensionError(
                f"score tensor shape {self.scores.shape[:2]} does not match "
                f"{len(self.bands)} bands x {len(self.classifiers)} classifiers"
            )
        if np.any(np.abs(self.scores.sum(axis=-1) - 1.0) > _SUM_TOL):
            raise DimensionError("every score vector in the tensor must sum to 1")

    @property
    def n_trials(self) -> int:
        return int(self.scores.shape[2])

    @property
    def n_classes(self) -> int:
        return int(self.scores.shape[3])

    def select(self, bands: Iterable[str], classifiers: Iterable) -> 'ScoreTensor':
        bands = _ordered_bands(bands)
        classifiers = _ordered_classifiers(classifiers)
        missing = [b for b in bands if b not in self.bands]
        missing += [c.value for c in classifiers if c not in self.classifiers]
        if missing:
            raise ConfigError(f"fusion config references {missing}, absent from the score tensor")
        bi = [self.bands.index(b) for b in bands]
        ci = [self.classifiers.index(c) for c in classifiers]
        return ScoreTensor(self.scores[np.ix_(bi, ci)], bands, classifiers)

    def take_trials(self, index) -> 'ScoreTensor':
        return ScoreTensor(self.scores[:, :, index, :], self.bands, self.classifiers)


@dataclass(frozen=True)
class FusionResult:
    scores: np.ndarray      # (ensayos, K)
    decisions: np.ndarray   # (ensayos,)
    flagged: np.ndarray     # (ensayos,) True si hubo sustitución por uniforme

    def accuracy(self, labels) -> float:
        return float(np.mean(self.decisions == np.asarray(labels)))


def get_fallback_count() -> int:
    return _FALLBACK_COUNT


def reset_fallback_count():
    global _FALLBACK_COUNT
    with _FALLBACK_LOCK:
        _FALLBACK_COUNT = 0


def _renormalise(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Divide cada vector de clases por su suma; el vector nulo pasa a uniforme."""
    global _FALLBACK_COUNT
    totals = values.sum(axis=-1, keepdims=True)
    zero = totals[..., 0] <= 0.0
    safe = np.where(totals > 0.0, totals, 1.0)
    out = np.where(totals > 0.0, values / safe, 1.0 / values.shape[-1])
    n_zero = int(np.count_nonzero(zero))
    if n_zero:
        with _FALLBACK_LOCK:
            _FALLBACK_COUNT += n_zero
    return out, zero


def _scores_of(t: Union[ScoreTensor, np.ndarray]) -> np.ndarray:
    arr = t.scores if isinstance(t, ScoreTensor) else np.asarray(t, dtype=float)
    if arr.ndim < 3:
        raise DimensionError(f"expected bands x classifiers x [trials x] classes, got shape {arr.shape}")
    return arr


def _frequency_phase(arr: np.ndarray, agg: AggregatorId) -> Tuple[np.ndarray, np.ndarray]:
    if arr.shape[0] == 0:
        raise ConfigError("frequency phase needs at least one band")
    fused = aggregate(agg, np.moveaxis(arr, 0, -1))
    return _renormalise(np.asarray(fused))


def _classifier_phase(collectives: np.ndarray, agg: AggregatorId) -> Tuple[np.ndarray, np.ndarray]:
    if collectives.shape[0] == 0:
        raise ConfigError("classifier phase needs at least one classifier")
    fused = aggregate(agg, np.moveaxis(collectives, 0, -1))
    return _renormalise(np.asarray(fused))


def frequency_phase(t: Union[ScoreTensor, np.ndarray], agg) -> np.ndarray:
    """
    Fase de frecuencia: agrega las bandas de cada tipo de clasificador.

    Args:
        t: ScoreTensor o array (bandas, clasificadores, [ensayos,] clases)
        agg: agregador de la fase

    Returns:
        Vectores colectivos (clasificadores, [ensayos,] clases), renormalizados
    """
    collectives, _ = _frequency_phase(_scores_of(t), AggregatorId.parse(agg))
    return collectives


def classifier_phase(collectives, agg) -> np.ndarray:
    """Fase de clasificador: agrega los vectores colectivos -> ScoreVector(s)."""
    arr = np.asarray(collectives, dtype=float)
    final, _ = _classifier_phase(arr, AggregatorId.parse(agg))
    return final


def decide(final):
    """argmax; numpy devuelve la primera posición, es decir, la clase de índice menor."""
    decision = np.argmax(np.asarray(final, dtype=float), axis=-1)
    return int(decision) if np.ndim(decision) == 0 else decision


def fuse_phases(arr: np.ndarray, freq_agg, class_agg) -> Tuple[np.ndarray, np.ndarray]:
    """Ambas fases sobre un array (bandas, clasificadores, ensayos, K): (puntuaciones, marcados)."""
    collectives, flag_freq = _frequency_phase(arr, AggregatorId.parse(freq_agg))
    final, flag_class = _classifier_phase(collectives, AggregatorId.parse(class_agg))
    return final, flag_class | np.any(flag_freq, axis=0)


def fuse(t: ScoreTensor, cfg: FusionConfig) -> FusionResult:
    """
    Fusión completa según el modo de la configuración.

    traditional: media de todas las salidas (bandas x clasificadores) y argmax
    mff / emf:   fase de frecuencia, fase de clasificador y argmax
    """
    sub = t.select(cfg.bands, cfg.classifiers)
    if cfg.mode is FusionMode.TRADITIONAL:
        final, flagged = _renormalise(sub.scores.mean(axis=(0, 1)))
    else:
        final, flagged = fuse_phases(sub.scores, cfg.freq_agg, cfg.class_agg)
    return FusionResult(scores=final, decisions=decide(final), flagged=flagged)
