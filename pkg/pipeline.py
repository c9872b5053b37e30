"""
Cadena completa por partición: potencia de banda -> (deriva) -> diferenciación
-> CSP -> clasificadores base -> ScoreTensor.

La extracción de potencia no usa etiquetas, así que se calcula una sola vez
por dataset; CSP y clasificadores se ajustan solo con los índices de
entrenamiento de cada partición.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from classifiers import CLASSIFIERS, ClassifierId, Hyper, fit, model_from_dict, model_to_dict, predict_scores
from csp import CspModel, component_count, fit_band, transform_batch
from dsp import TrialSet, band_power_batch, differentiate, get_band, inject_power_drift, resolvable_bands
from errors import ConfigError, DimensionError, EmptyBandError
from fusion import ScoreTensor


@dataclass(frozen=True)
class PipelineConfig:
    bands: Tuple[str, ...] = tuple(config.WAVE_BANDS)
    classifiers: Tuple[ClassifierId, ...] = CLASSIFIERS
    window: int = config.WINDOW_LENGTH
    step: int = config.WINDOW_STEP
    differentiate: bool = True
    csp_components: Dict[str, int] = field(default_factory=lambda: dict(config.CSP_COMPONENTS))
    hyper: Hyper = field(default_factory=Hyper)
    drift: float = 0.0
    drift_seed: int = config.DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, 'bands', tuple(get_band(b).name for b in self.bands))
        object.__setattr__(self, 'classifiers', tuple(ClassifierId.parse(c) for c in self.classifiers))
        if not self.bands or not self.classifiers:
            raise ConfigError("pipeline needs at least one band and one classifier")

    def to_dict(self) -> dict:
        return {
            'bands': list(self.bands),
            'classifiers': [c.value for c in self.classifiers],
            'window': self.window,
            'step': self.step,
            'differentiate': self.differentiate,
            'csp_components': dict(self.csp_components),
            'hyper': self.hyper.to_dict(),
            'drift': self.drift,
            'drift_seed': self.drift_seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'PipelineConfig':
        data = dict(data)
        data['hyper'] = Hyper.from_dict(data.get('hyper', {}))
        data['bands'] = tuple(data.get('bands', config.WAVE_BANDS))
        data['classifiers'] = tuple(data.get('classifiers', [c.value for c in CLASSIFIERS]))
        return cls(**data)


@dataclass(frozen=True)
class PipelineModel:
    config: PipelineConfig
    bands: Tuple[str, ...]
    n_channels: int
    n_classes: int
    csp: Dict[str, List[CspModel]]
    models: Dict[Tuple[str, ClassifierId], object]

    def to_dict(self) -> dict:
        return {
            'config': self.config.to_dict(),
            'bands': list(self.bands),
            'n_channels': self.n_channels,
            'n_classes': self.n_classes,
            'csp': {band: [m.to_dict() for m in models] for band, models in self.csp.items()},
            'models': [
                {'band': band, 'classifier': clf.value, 'model': model_to_dict(model)}
                for (band, clf), model in self.models.items()
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'PipelineModel':
        csp = {band: [CspModel.from_dict(m) for m in models] for band, models in data['csp'].items()}
        n_channels = int(data['n_channels'])
        for band, models in csp.items():
            for m in models:
                if m.n_channels != n_channels:
                    raise DimensionError(
                        f"CSP filters for band '{band}' have {m.n_channels} channels, bundle declares {n_channels}"
                    )
        models = {
            (item['band'], ClassifierId.parse(item['classifier'])): model_from_dict(item['model'])
            for item in data['models']
        }
        return cls(
            config=PipelineConfig.from_dict(data['config']),
            bands=tuple(data['bands']),
            n_channels=n_channels,
            n_classes=int(data['n_classes']),
            csp=csp,
            models=models,
        )


def usable_bands(fs: float, cfg: PipelineConfig) -> List[str]:
    """Bandas de la configuración con al menos un bin DFT; avisa de las descartadas."""
    wanted = [get_band(b) for b in cfg.bands]
    usable = resolvable_bands(fs, cfg.window, wanted)
    skipped = [b.name for b in wanted if b not in usable]
    if skipped:
        print(f"⚠️ Bandas sin bins DFT a fs={fs:g} Hz y ventana {cfg.window}: {', '.join(skipped)} (se omiten)")
    if not usable:
        raise EmptyBandError(
            f"none of the bands {list(cfg.bands)} is resolvable at fs={fs:g} Hz with a {cfg.window}-point window"
        )
    return [b.name for b in usable]


def extract_features(trialset: TrialSet, cfg: PipelineConfig) -> Dict[str, np.ndarray]:
    """
    Series por banda de todos los ensayos: {banda: (ensayos, canales, ventanas)}.

    Aplica, en este orden, potencia de banda, deriva sintética (si drift > 0)
    y diferenciación (si está activada).
    """
    series = {}
    for index, name in enumerate(usable_bands(trialset.fs, cfg)):
        power = band_power_batch(trialset.samples, trialset.fs, get_band(name), cfg.window, cfg.step)
        if cfg.drift:
            power = inject_power_drift(power, cfg.drift, cfg.drift_seed + index)
        series[name] = differentiate(power) if cfg.differentiate else power
    return series


def fit_pipeline(
    series: Dict[str, np.ndarray],
    labels: np.ndarray,
    train_idx: Sequence[int],
    cfg: PipelineConfig,
    n_classes: int,
) -> PipelineModel:
    labels = np.asarray(labels)
    y_train = labels[train_idx]
    csp_models, models = {}, {}
    n_channels = None
    for band, arr in series.items():
        train = arr[train_idx]
        n_channels = arr.shape[1]
        m = component_count(band, n_channels, cfg.csp_components)
        csp_models[band] = fit_band(train, y_train, get_band(band), m, n_classes)
        features = transform_batch(csp_models[band], train)
        for clf in cfg.classifiers:
            models[(band, clf)] = fit(clf, features, y_train, cfg.hyper, n_classes)
    return PipelineModel(
        config=cfg,
        bands=tuple(series),
        n_channels=int(n_channels),
        n_classes=n_classes,
        csp=csp_models,
        models=models,
    )


def predict_tensor(
    model: PipelineModel,
    series: Dict[str, np.ndarray],
    idx: Optional[Sequence[int]] = None,
) -> ScoreTensor:
    """Puntuaciones de todos los clasificadores base para los ensayos idx."""
    blocks = []
    for band in model.bands:
        if band not in series:
            raise DimensionError(f"no feature series for band '{band}'")
        arr = series[band] if idx is None else series[band][idx]
        features = transform_batch(model.csp[band], arr)
        blocks.append([predict_scores(model.models[(band, clf)], features) for clf in model.config.classifiers])
    return ScoreTensor(np.asarray(blocks), model.bands, model.config.classifiers)
