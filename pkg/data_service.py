"""
Servicio de datos: lectura y escritura de datasets (manifest.json + CSV por
ensayo) y persistencia de modelos entrenados (bundle JSON).

Formato del dataset:
    manifest.json  {"format": 1, "name", "fs", "channels", "classes",
                    "trials": [{"file": "trial_0000.csv", "label": "left"}, ...]}
    trial_XXXX.csv cabecera con los nombres de canal; una fila por muestra
"""
import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

import config
from dsp import TrialSet
from errors import (
    BundleVersionError,
    CorruptBundleError,
    DataError,
    DatasetError,
    DimensionError,
    MissingFileError,
    RaggedDataError,
    UnknownLabelError,
    InvalidSamplingRateError,
)
from fusion import FusionConfig, FusionResult, fuse
from pipeline import PipelineConfig, PipelineModel, extract_features, fit_pipeline, predict_tensor

PathLike = Union[str, Path]

MANIFEST_NAME = 'manifest.json'


@dataclass(frozen=True)
class TrialEntry:
    file: str
    label: str


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    fs: float
    channels: Tuple[str, ...]
    classes: Tuple[str, ...]
    trials: Tuple[TrialEntry, ...]

    def to_dict(self) -> dict:
        return {
            'format': config.DATASET_FORMAT,
            'name': self.name,
            'fs': self.fs,
            'channels': list(self.channels),
            'classes': list(self.classes),
            'trials': [{'file': t.file, 'label': t.label} for t in self.trials],
        }


def _manifest_path(path: PathLike) -> Path:
    path = Path(path)
    return path / MANIFEST_NAME if path.is_dir() or not path.suffix else path


def read_manifest(path: PathLike) -> DatasetManifest:
    manifest_path = _manifest_path(path)
    if not manifest_path.is_file():
        raise MissingFileError(f"dataset manifest not found: {manifest_path}")
    try:
        with open(manifest_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"manifest {manifest_path} is not valid JSON: {exc}") from exc
    if data.get('format') != config.DATASET_FORMAT:
        raise DatasetError(
            f"manifest {manifest_path} has format {data.get('format')!r}, expected {config.DATASET_FORMAT}"
        )
    try:
        fs = float(data['fs'])
        channels = tuple(str(c) for c in data['channels'])
        classes = tuple(str(c) for c in data['classes'])
        trials = tuple(TrialEntry(str(t['file']), str(t['label'])) for t in data['trials'])
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"manifest {manifest_path} is missing or has a malformed field: {exc}") from exc
    if fs <= 0:
        raise InvalidSamplingRateError(f"manifest {manifest_path} declares fs={fs:g} Hz, must be positive")
    if not trials:
        raise DatasetError(f"manifest {manifest_path} lists no trials")
    for index, trial in enumerate(trials):
        if trial.label not in classes:
            raise UnknownLabelError(
                f"trial {index} ({trial.file}) has label '{trial.label}', not in classes {list(classes)}"
            )
    return DatasetManifest(data.get('name', manifest_path.parent.name), fs, channels, classes, trials)


def read_trial_csv(path: Path, channels: Sequence[str]) -> np.ndarray:
    """Lee un ensayo CSV (filas = muestras, columnas = canales) -> canales x tiempo."""
    if not path.is_file():
        raise MissingFileError(f"trial file not found: {path}")
    with open(path, 'r', encoding='utf-8', newline='') as f:
        rows = list(csv.reader(f))
    if not rows:
        raise RaggedDataError(f"{path}: empty file, expected a header row")
    header = [h.strip() for h in rows[0]]
    if len(header) != len(channels):
        raise RaggedDataError(
            f"{path}: header has {len(header)} columns, manifest declares {len(channels)} channels"
        )
    values = []
    for row_index, row in enumerate(rows[1:], start=1):
        if not row:
            continue
        if len(row) != len(header):
            raise RaggedDataError(f"{path}: row {row_index} has {len(row)} columns, expected {len(header)}")
        try:
            values.append([float(v) for v in row])
        except ValueError as exc:
            raise DatasetError(f"{path}: row {row_index} is not numeric: {exc}") from exc
    if not values:
        raise RaggedDataError(f"{path}: no samples after the header row")
    return np.asarray(values, dtype=float).T


def load_dataset(path: PathLike) -> TrialSet:
    """
    Carga un dataset desde su directorio (o ruta del manifest).

    Args:
        path: directorio que contiene manifest.json, o el propio manifest

    Returns:
        TrialSet con etiquetas 0..K-1 en el orden de 'classes'
    """
    manifest_path = _manifest_path(path)
    manifest = read_manifest(manifest_path)
    base = manifest_path.parent
    trials = []
    for entry in manifest.trials:
        samples = read_trial_csv(base / entry.file, manifest.channels)
        if trials and samples.shape[1] != trials[0].shape[1]:
            raise RaggedDataError(
                f"{base / entry.file}: {samples.shape[1]} samples, expected {trials[0].shape[1]} like the first trial"
            )
        trials.append(samples)
    labels = np.array([manifest.classes.index(t.label) for t in manifest.trials])
    print(f"✅ Dataset '{manifest.name}' cargado: {len(trials)} ensayos, {len(manifest.channels)} canales")
    return TrialSet(
        samples=np.stack(trials),
        labels=labels,
        fs=manifest.fs,
        channels=manifest.channels,
        classes=manifest.classes,
        name=manifest.name,
    )


def save_dataset(trialset: TrialSet, path: PathLike) -> Path:
    """Escribe manifest.json y un CSV por ensayo (17 cifras significativas)."""
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for index in range(len(trialset)):
        name = f"trial_{index:04d}.csv"
        np.savetxt(
            out / name,
            trialset.samples[index].T,
            delimiter=',',
            header=','.join(trialset.channels),
            comments='',
            fmt='%.17g',
        )
        entries.append(TrialEntry(name, trialset.classes[int(trialset.labels[index])]))
    manifest = DatasetManifest(trialset.name, float(trialset.fs), trialset.channels, trialset.classes, tuple(entries))
    with open(out / MANIFEST_NAME, 'w', encoding='utf-8') as f:
        json.dump(manifest.to_dict(), f, indent=2)
    print(f"💾 Dataset guardado en {out} ({len(entries)} ensayos)")
    return out


def select_classes(trialset: TrialSet, names: Sequence[str]) -> TrialSet:
    """Subconjunto de clases (p. ej. left/right de un dataset de cuatro), reetiquetado 0..k-1."""
    names = [str(n) for n in names]
    unknown = [n for n in names if n not in trialset.classes]
    if unknown:
        raise UnknownLabelError(f"classes {unknown} are not in the dataset {list(trialset.classes)}")
    old = [trialset.classes.index(n) for n in names]
    mask = np.isin(trialset.labels, old)
    remap = {o: i for i, o in enumerate(old)}
    return TrialSet(
        samples=trialset.samples[mask],
        labels=np.array([remap[int(l)] for l in trialset.labels[mask]]),
        fs=trialset.fs,
        channels=trialset.channels,
        classes=tuple(names),
        name=f"{trialset.name}[{'+'.join(names)}]",
    )


# ---------------------------------------------------------------------------
# Bundles de modelos
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bundle:
    model: PipelineModel
    fusion: FusionConfig
    channels: Tuple[str, ...]
    classes: Tuple[str, ...]
    fs: float

    def to_dict(self) -> dict:
        return {
            'format': config.BUNDLE_FORMAT,
            'kind': 'emf-bundle',
            'config': self.fusion.to_dict(),
            'channels': list(self.channels),
            'classes': list(self.classes),
            'fs': self.fs,
            'model': self.model.to_dict(),
        }

    def predict(self, trialset: TrialSet) -> FusionResult:
        if tuple(trialset.channels) != self.channels:
            raise DimensionError(f"dataset channels {list(trialset.channels)} differ from bundle channels {list(self.channels)}")
        if float(trialset.fs) != self.fs:
            raise InvalidSamplingRateError(f"dataset is sampled at {trialset.fs:g} Hz but the bundle was trained at {self.fs:g} Hz")
        series = extract_features(trialset, self.model.config)
        return fuse(predict_tensor(self.model, series), self.fusion)


def train_bundle(
    trialset: TrialSet,
    fusion_cfg: FusionConfig,
    pipeline_cfg: Optional[PipelineConfig] = None,
) -> Bundle:
    """Ajusta CSP y clasificadores con todos los ensayos del dataset."""
    pipeline_cfg = pipeline_cfg or PipelineConfig(bands=fusion_cfg.bands, classifiers=fusion_cfg.classifiers)
    series = extract_features(trialset, pipeline_cfg)
    kept = tuple(b for b in fusion_cfg.bands if b in series)
    if kept != fusion_cfg.bands:
        fusion_cfg = FusionConfig(kept, fusion_cfg.classifiers, fusion_cfg.freq_agg, fusion_cfg.class_agg, fusion_cfg.mode)
    model = fit_pipeline(series, trialset.labels, np.arange(len(trialset)), pipeline_cfg, trialset.n_classes)
    return Bundle(model, fusion_cfg, tuple(trialset.channels), tuple(trialset.classes), float(trialset.fs))


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def save_bundle(bundle: Bundle, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(bundle.to_dict(), f, default=_json_default)
    print(f"💾 Modelo guardado en {path}")
    return path


def load_bundle(path: PathLike, expected_channels: Optional[Sequence[str]] = None) -> Bundle:
    """
    Carga un bundle; las predicciones son idénticas bit a bit a las del modelo guardado.

    Raises:
        MissingFileError, CorruptBundleError, BundleVersionError, DimensionError
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"model bundle not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CorruptBundleError(f"model bundle {path} is corrupt: {exc}") from exc
    if not isinstance(data, dict) or data.get('kind') != 'emf-bundle':
        raise CorruptBundleError(f"{path} is not an EMF model bundle")
    if data.get('format') != config.BUNDLE_FORMAT:
        raise BundleVersionError(
            f"model bundle {path} has format {data.get('format')!r}, this version reads {config.BUNDLE_FORMAT}"
        )
    try:
        channels = tuple(data['channels'])
        model = PipelineModel.from_dict(data['model'])
        bundle = Bundle(
            model=model,
            fusion=FusionConfig.from_dict(data['config']),
            channels=channels,
            classes=tuple(data['classes']),
            fs=float(data['fs']),
        )
    except DataError:
        raise
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise CorruptBundleError(f"model bundle {path} is missing or has a malformed field: {exc}") from exc
    if model.n_channels != len(channels):
        raise DimensionError(f"bundle {path} lists {len(channels)} channels but its filters use {model.n_channels}")
    if expected_channels is not None and tuple(expected_channels) != channels:
        raise DimensionError(
            f"bundle {path} was trained on {len(channels)} channels {list(channels)}, "
            f"got {len(expected_channels)} {list(expected_channels)}"
        )
    return bundle


def load_results(path: PathLike) -> dict:
    """Lee un results.json escrito por reports.write_results."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"results file not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"results file {path} is not valid JSON: {exc}") from exc
