"""
Evaluación del EMF: particiones estratificadas, validación cruzada, métricas
(ITR, estadístico Q), rejilla de 17x17 pares de agregadores y búsqueda
exhaustiva OEMF.

Las puntuaciones de los clasificadores base se calculan una vez por
partición (ScoreCache) y todas las fusiones posteriores trabajan sobre esa
caché: la rejilla y la búsqueda solo repiten agregaciones vectorizadas.
"""
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import xlogy
from sklearn.model_selection import StratifiedKFold, StratifiedShuffleSplit

import config
from aggregation import AGGREGATORS, AggregatorId
from classifiers import CLASSIFIERS, ClassifierId
from dsp import TrialSet
from errors import ConfigError, DimensionError, EmptyBandError, OutOfRangeError, SplitError
from fusion import (
    FusionConfig,
    FusionMode,
    ScoreTensor,
    _classifier_phase,
    _frequency_phase,
    decide,
    fuse,
    get_fallback_count,
)
from pipeline import PipelineConfig, extract_features, fit_pipeline, predict_tensor

# Agregadores candidatos del marco MFF (mismo agregador en ambas fases)
MFF_AGGREGATORS = (
    AggregatorId.CHOQUET,
    AggregatorId.CF,
    AggregatorId.CF_MM,
    AggregatorId.SUGENO,
    AggregatorId.HAMACHER_SUGENO,
    AggregatorId.MEAN,
)
# Marcos clásicos: sin la banda SMR y con los tres clasificadores de partida
TRADITIONAL_BANDS = ('delta', 'theta', 'alpha', 'beta', 'all')
MFF_CLASSIFIERS = (ClassifierId.LDA, ClassifierId.QDA, ClassifierId.KNN)


def _workers(threads: Optional[int]) -> int:
    return threads or config.THREADS or os.cpu_count() or 1


def _mean_std(values: Sequence[float]) -> Tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    return float(np.mean(arr)), float(np.std(arr))


# ---------------------------------------------------------------------------
# Particiones
# ---------------------------------------------------------------------------

class SplitKind(str, Enum):
    KFOLD = 'kfold'
    HOLDOUT = 'holdout'


@dataclass(frozen=True)
class SplitPlan:
    kind: SplitKind = SplitKind.KFOLD
    k: int = config.DEFAULT_FOLDS
    reps: int = 20
    train_frac: float = 0.5
    seed: int = config.DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, 'kind', SplitKind(self.kind))
        if self.kind is SplitKind.KFOLD and self.k < 2:
            raise ConfigError(f"k-fold needs k >= 2, got {self.k}")
        if self.kind is SplitKind.HOLDOUT:
            if self.reps < 1:
                raise ConfigError(f"repeated holdout needs at least one repetition, got {self.reps}")
            if not 0.0 < self.train_frac < 1.0:
                raise ConfigError(f"train fraction must be in (0, 1), got {self.train_frac}")

    @classmethod
    def kfold(cls, k: int = config.DEFAULT_FOLDS, seed: int = config.DEFAULT_SEED) -> 'SplitPlan':
        return cls(kind=SplitKind.KFOLD, k=k, seed=seed)

    @classmethod
    def repeated_holdout(cls, reps: int = 20, train_frac: float = 0.5, seed: int = config.DEFAULT_SEED) -> 'SplitPlan':
        return cls(kind=SplitKind.HOLDOUT, reps=reps, train_frac=train_frac, seed=seed)

    @property
    def n_splits(self) -> int:
        return self.k if self.kind is SplitKind.KFOLD else self.reps

    def to_dict(self) -> dict:
        if self.kind is SplitKind.KFOLD:
            return {'kind': 'kfold', 'k': self.k, 'seed': self.seed}
        return {'kind': 'holdout', 'reps': self.reps, 'train_frac': self.train_frac, 'seed': self.seed}


@dataclass(frozen=True)
class Split:
    index: int
    train: np.ndarray
    test: np.ndarray


def make_splits(labels, plan: SplitPlan) -> List[Split]:
    """Particiones estratificadas; cada clase aparece en cada conjunto de entrenamiento."""
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    if classes.size < 2:
        raise SplitError(f"stratified splits need at least two classes, found {classes.tolist()}")
    if plan.kind is SplitKind.KFOLD:
        if counts.min() < plan.k:
            raise SplitError(
                f"stratification impossible: class {classes[np.argmin(counts)]} has "
                f"{counts.min()} trials for {plan.k} folds"
            )
        splitter = StratifiedKFold(n_splits=plan.k, shuffle=True, random_state=plan.seed)
    else:
        splitter = StratifiedShuffleSplit(n_splits=plan.reps, train_size=plan.train_frac, random_state=plan.seed)
    try:
        raw = list(splitter.split(np.zeros(labels.size), labels))
    except ValueError as exc:
        raise SplitError(f"stratification impossible: {exc}") from exc
    splits = []
    for index, (train, test) in enumerate(raw):
        missing = np.setdiff1d(classes, labels[train])
        if missing.size:
            raise SplitError(f"split {index} has no training trials for classes {missing.tolist()}")
        splits.append(Split(index=index, train=np.sort(train), test=np.sort(test)))
    return splits


# ---------------------------------------------------------------------------
# Caché de puntuaciones base
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitScores:
    split: Split
    tensor: ScoreTensor     # solo ensayos de test
    labels: np.ndarray      # etiquetas de test


@dataclass(frozen=True)
class ScoreCache:
    splits: Tuple[SplitScores, ...]
    pipeline: PipelineConfig
    plan: SplitPlan

    @property
    def bands(self) -> Tuple[str, ...]:
        return self.splits[0].tensor.bands

    @property
    def classifiers(self) -> Tuple[ClassifierId, ...]:
        return self.splits[0].tensor.classifiers


def score_splits(
    trialset: TrialSet,
    pipeline_cfg: PipelineConfig,
    plan: SplitPlan,
    threads: Optional[int] = None,
) -> ScoreCache:
    """
    Ajusta CSP y clasificadores en cada partición (solo con entrenamiento) y
    guarda las puntuaciones de test de todos los clasificadores base.
    """
    series = extract_features(trialset, pipeline_cfg)
    splits = make_splits(trialset.labels, plan)
    labels = np.asarray(trialset.labels)

    def work(split: Split) -> SplitScores:
        model = fit_pipeline(series, labels, split.train, pipeline_cfg, trialset.n_classes)
        return SplitScores(split=split, tensor=predict_tensor(model, series, split.test), labels=labels[split.test])

    with ThreadPoolExecutor(max_workers=_workers(threads)) as pool:
        results = tuple(pool.map(work, splits))
    for item in results:
        print(
            f"✅ Partición {item.split.index + 1}/{len(results)}: "
            f"{item.split.train.size} entrenamiento, {item.split.test.size} test"
        )
    return ScoreCache(splits=results, pipeline=pipeline_cfg, plan=plan)


def _fit_to_cache(cfg: FusionConfig, cache: ScoreCache) -> FusionConfig:
    """Quita de la configuración las bandas que la caché no tiene (no resolubles)."""
    kept = tuple(b for b in cfg.bands if b in cache.bands)
    if not kept:
        raise EmptyBandError(f"none of the bands {list(cfg.bands)} has cached scores")
    if len(kept) == len(cfg.bands):
        return cfg
    print(f"⚠️ Bandas sin puntuaciones en caché, se omiten: {', '.join(b for b in cfg.bands if b not in kept)}")
    return FusionConfig(kept, cfg.classifiers, cfg.freq_agg, cfg.class_agg, cfg.mode)


# ---------------------------------------------------------------------------
# Validación cruzada
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CvResult:
    fusion: FusionConfig
    plan: SplitPlan
    accuracies: Tuple[float, ...]
    mean: float
    std: float
    flagged: int

    def to_dict(self) -> dict:
        return {
            'fusion': self.fusion.to_dict(),
            'plan': self.plan.to_dict(),
            'accuracies': list(self.accuracies),
            'mean': self.mean,
            'std': self.std,
            'flagged_trials': self.flagged,
        }


def run_cv(
    trialset: Optional[TrialSet],
    fusion_cfg: FusionConfig,
    plan: SplitPlan,
    pipeline_cfg: Optional[PipelineConfig] = None,
    threads: Optional[int] = None,
    cache: Optional[ScoreCache] = None,
) -> CvResult:
    """
    Validación cruzada de una configuración de fusión.

    Args:
        trialset: ensayos etiquetados (puede ser None si se pasa cache)
        fusion_cfg: bandas, clasificadores, agregadores y modo
        plan: esquema de particiones
        pipeline_cfg: configuración de extracción/ajuste; por defecto la
            restringida a las bandas y clasificadores de fusion_cfg
        threads: hilos para ajustar las particiones
        cache: puntuaciones base ya calculadas (se reutilizan tal cual)

    Returns:
        CvResult con la exactitud de cada partición, media y desviación
    """
    if cache is None:
        if pipeline_cfg is None:
            pipeline_cfg = PipelineConfig(bands=fusion_cfg.bands, classifiers=fusion_cfg.classifiers)
        cache = score_splits(trialset, pipeline_cfg, plan, threads)
    cfg = _fit_to_cache(fusion_cfg, cache)
    accuracies, flagged = [], 0
    for item in cache.splits:
        result = fuse(item.tensor, cfg)
        accuracies.append(result.accuracy(item.labels))
        flagged += int(np.count_nonzero(result.flagged))
    mean, std = _mean_std(accuracies)
    if flagged:
        print(f"⚠️ {flagged} ensayos con vector de fusión nulo (sustituido por uniforme)")
    return CvResult(cfg, cache.plan, tuple(accuracies), mean, std, flagged)


# ---------------------------------------------------------------------------
# Métricas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ItrInput:
    n_classes: int
    accuracy: float
    observations: float
    minutes: float

    def __post_init__(self):
        if self.n_classes < 2:
            raise OutOfRangeError(f"ITR needs at least 2 classes, got {self.n_classes}")
        if not 0.0 <= self.accuracy <= 1.0:
            raise OutOfRangeError(f"accuracy must be in [0, 1], got {self.accuracy}")
        if self.minutes <= 0:
            raise OutOfRangeError(f"total time must be positive, got {self.minutes} minutes")
        if self.observations < 0:
            raise OutOfRangeError(f"observation count must be nonnegative, got {self.observations}")


def bits_per_trial(n_classes: int, accuracy: float) -> float:
    """B = log2 N + P log2 P + (1-P) log2((1-P)/(N-1)), con 0·log 0 = 0."""
    p, n = float(accuracy), int(n_classes)
    return float(math.log2(n) + (xlogy(p, p) + xlogy(1.0 - p, (1.0 - p) / (n - 1))) / math.log(2.0))


def itr(inp: ItrInput) -> Tuple[float, float]:
    """(bits por ensayo, bits por minuto) con Q = S/T ensayos por minuto."""
    bits = bits_per_trial(inp.n_classes, inp.accuracy)
    return bits, bits * (inp.observations / inp.minutes)


@dataclass(frozen=True)
class ContingencyCounts:
    n11: int
    n10: int
    n01: int
    n00: int

    @property
    def total(self) -> int:
        return self.n11 + self.n10 + self.n01 + self.n00

    def q(self) -> float:
        den = self.n11 * self.n00 + self.n01 * self.n10
        if den == 0:
            return 0.0
        return (self.n11 * self.n00 - self.n01 * self.n10) / den


def contingency(first, second) -> ContingencyCounts:
    a = np.asarray(first, dtype=bool)
    b = np.asarray(second, dtype=bool)
    if a.shape != b.shape:
        raise DimensionError(f"correctness vectors differ in length: {a.size} vs {b.size}")
    return ContingencyCounts(
        n11=int(np.count_nonzero(a & b)),
        n10=int(np.count_nonzero(a & ~b)),
        n01=int(np.count_nonzero(~a & b)),
        n00=int(np.count_nonzero(~a & ~b)),
    )


def q_statistic(outputs: Sequence) -> float:
    """Q del sistema: media de la Q de todos los pares de clasificadores."""
    if len(outputs) < 2:
        raise ConfigError(f"the Q-statistic needs at least 2 classifiers, got {len(outputs)}")
    values = [contingency(a, b).q() for a, b in itertools.combinations(outputs, 2)]
    return float(np.mean(values))


def base_correctness(cache: ScoreCache) -> Dict[str, np.ndarray]:
    """Acierto por ensayo de cada clasificador base ('banda/clasificador'), concatenando particiones."""
    out = {}
    for bi, band in enumerate(cache.bands):
        for ci, clf in enumerate(cache.classifiers):
            out[f"{band}/{clf.value}"] = np.concatenate([
                decide(item.tensor.scores[bi, ci]) == item.labels for item in cache.splits
            ])
    return out


def ensemble_q_statistic(cache: ScoreCache) -> float:
    return q_statistic(list(base_correctness(cache).values()))


# ---------------------------------------------------------------------------
# Rejilla de agregadores
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridResult:
    aggregators: Tuple[AggregatorId, ...]
    matrix: np.ndarray          # filas = fase de frecuencia, columnas = fase de clasificador
    per_split: np.ndarray       # (filas, columnas, particiones)
    base: FusionConfig

    @property
    def best(self) -> Tuple[AggregatorId, AggregatorId, float]:
        # argmax -> primera celda en orden fila-columna
        flat = int(np.argmax(self.matrix))
        row, col = divmod(flat, len(self.aggregators))
        return self.aggregators[row], self.aggregators[col], float(self.matrix[row, col])


def _split_accuracy(final: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(decide(final) == labels))


def aggregator_grid(
    trialset: Optional[TrialSet],
    base_cfg: FusionConfig,
    plan: SplitPlan,
    pipeline_cfg: Optional[PipelineConfig] = None,
    threads: Optional[int] = None,
    cache: Optional[ScoreCache] = None,
    aggregators: Sequence = AGGREGATORS,
) -> GridResult:
    """Exactitud media de cada par (agregador de frecuencia, agregador de clasificador)."""
    aggs = tuple(AggregatorId.parse(a) for a in aggregators)
    if cache is None:
        if pipeline_cfg is None:
            pipeline_cfg = PipelineConfig(bands=base_cfg.bands, classifiers=base_cfg.classifiers)
        cache = score_splits(trialset, pipeline_cfg, plan, threads)
    cfg = _fit_to_cache(base_cfg, cache)
    subs = [(item.tensor.select(cfg.bands, cfg.classifiers).scores, item.labels) for item in cache.splits]

    def row(freq: AggregatorId) -> np.ndarray:
        out = np.empty((len(aggs), len(subs)))
        for s, (scores, labels) in enumerate(subs):
            collectives, _ = _frequency_phase(scores, freq)
            for c, cls_agg in enumerate(aggs):
                final, _ = _classifier_phase(collectives, cls_agg)
                out[c, s] = _split_accuracy(final, labels)
        return out

    with ThreadPoolExecutor(max_workers=_workers(threads)) as pool:
        per_split = np.stack(list(pool.map(row, aggs)))
    matrix = np.array([[_mean_std(per_split[r, c])[0] for c in range(len(aggs))] for r in range(len(aggs))])
    grid = GridResult(aggregators=aggs, matrix=matrix, per_split=per_split, base=cfg)
    freq, cls_agg, acc = grid.best
    print(f"✅ Rejilla {len(aggs)}x{len(aggs)} completada; mejor par {freq.value}/{cls_agg.value}: {acc:.4f}")
    return grid


# ---------------------------------------------------------------------------
# Búsqueda exhaustiva OEMF
# ---------------------------------------------------------------------------

def count_subset_pairs(n_bands: int, n_classifiers: int) -> int:
    return (2 ** n_bands - 1) * (2 ** n_classifiers - 1)


def _nonempty_subsets(items: Sequence) -> List[tuple]:
    return [combo for size in range(1, len(items) + 1) for combo in itertools.combinations(items, size)]


def _agg_pairs(pairs) -> List[Tuple[AggregatorId, AggregatorId]]:
    if pairs is None:
        return [(f, c) for f in AGGREGATORS for c in AGGREGATORS]
    parsed = [(AggregatorId.parse(f), AggregatorId.parse(c)) for f, c in pairs]
    if not parsed:
        raise ConfigError("the aggregator pair list is empty")
    return parsed


def enumerate_configs(
    bands: Sequence[str],
    classifiers: Sequence,
    agg_pairs=None,
) -> Iterator[FusionConfig]:
    """Todas las configuraciones EMF en orden de catálogo."""
    probe = FusionConfig(tuple(bands), tuple(classifiers))
    for band_subset in _nonempty_subsets(probe.bands):
        for clf_subset in _nonempty_subsets(probe.classifiers):
            for freq, cls_agg in _agg_pairs(agg_pairs):
                yield FusionConfig(band_subset, clf_subset, freq, cls_agg, FusionMode.EMF)


@dataclass(frozen=True)
class SearchEntry:
    rank: int
    bands: Tuple[str, ...]
    classifiers: Tuple[ClassifierId, ...]
    freq_agg: AggregatorId
    class_agg: AggregatorId
    accuracy: float
    std: float

    def fusion_config(self) -> FusionConfig:
        return FusionConfig(self.bands, self.classifiers, self.freq_agg, self.class_agg, FusionMode.EMF)

    def to_dict(self) -> dict:
        return {
            'rank': self.rank,
            'bands': list(self.bands),
            'classifiers': [c.value for c in self.classifiers],
            'freq_agg': self.freq_agg.value,
            'class_agg': self.class_agg.value,
            'accuracy': self.accuracy,
            'std': self.std,
        }


@dataclass(frozen=True)
class SearchResult:
    band_subsets: Tuple[tuple, ...]
    classifier_subsets: Tuple[tuple, ...]
    agg_pairs: Tuple[Tuple[AggregatorId, AggregatorId], ...]
    means: np.ndarray       # (subconjuntos de bandas, de clasificadores, pares)
    stds: np.ndarray
    order: np.ndarray = field(repr=False)

    @property
    def n_subset_pairs(self) -> int:
        return len(self.band_subsets) * len(self.classifier_subsets)

    @property
    def n_configs(self) -> int:
        return int(self.means.size)

    def _entry(self, rank: int, flat: int) -> SearchEntry:
        bi, ci, pi = np.unravel_index(flat, self.means.shape)
        freq, cls_agg = self.agg_pairs[pi]
        return SearchEntry(
            rank=rank,
            bands=self.band_subsets[bi],
            classifiers=self.classifier_subsets[ci],
            freq_agg=freq,
            class_agg=cls_agg,
            accuracy=float(self.means[bi, ci, pi]),
            std=float(self.stds[bi, ci, pi]),
        )

    def top(self, n: Optional[int] = None) -> List[SearchEntry]:
        limit = self.n_configs if n is None else min(n, self.n_configs)
        return [self._entry(rank + 1, int(flat)) for rank, flat in enumerate(self.order[:limit])]

    @property
    def best(self) -> SearchEntry:
        return self._entry(1, int(self.order[0]))


def _rank(means: np.ndarray, band_subsets, classifier_subsets) -> np.ndarray:
    """Orden: exactitud desc, menos clasificadores, menos bandas, orden de catálogo."""
    bi, ci, pi = np.unravel_index(np.arange(means.size), means.shape)
    n_bands = np.array([len(s) for s in band_subsets])[bi]
    n_clfs = np.array([len(s) for s in classifier_subsets])[ci]
    # lexsort: la última clave es la principal
    return np.lexsort((pi, ci, bi, n_bands, n_clfs, -means.ravel()))


def oemf_search(
    trialset: Optional[TrialSet],
    plan: SplitPlan,
    pipeline_cfg: Optional[PipelineConfig] = None,
    agg_pairs=None,
    bands: Optional[Sequence[str]] = None,
    classifiers: Optional[Sequence] = None,
    threads: Optional[int] = None,
    cache: Optional[ScoreCache] = None,
) -> SearchResult:
    """
    Búsqueda exhaustiva de subconjuntos de bandas y clasificadores y pares
    de agregadores.

    Los vectores colectivos de la fase de frecuencia se calculan una vez por
    (partición, subconjunto de bandas, agregador) para todos los tipos de
    clasificador a la vez; cada subconjunto de clasificadores solo repite la
    segunda fase.
    """
    if cache is None:
        cache = score_splits(trialset, pipeline_cfg or PipelineConfig(), plan, threads)
    pairs = _agg_pairs(agg_pairs)
    band_pool = cache.bands if bands is None else FusionConfig(tuple(bands), cache.classifiers).bands
    clf_pool = cache.classifiers if classifiers is None else FusionConfig(cache.bands, tuple(classifiers)).classifiers
    missing = [b for b in band_pool if b not in cache.bands] + [c.value for c in clf_pool if c not in cache.classifiers]
    if missing:
        raise ConfigError(f"search restricted to {missing}, absent from the score cache")

    band_subsets = _nonempty_subsets(band_pool)
    clf_subsets = _nonempty_subsets(clf_pool)
    clf_index = [[cache.classifiers.index(c) for c in subset] for subset in clf_subsets]
    freq_aggs = list(dict.fromkeys(f for f, _ in pairs))
    pairs_by_freq = {f: [(p, c) for p, (g, c) in enumerate(pairs) if g is f] for f in freq_aggs}
    print(
        f"🔍 Búsqueda OEMF: {len(band_subsets) * len(clf_subsets)} pares de subconjuntos x "
        f"{len(pairs)} pares de agregadores x {len(cache.splits)} particiones"
    )
    fallbacks_before = get_fallback_count()

    def work(item: Tuple[int, int]) -> np.ndarray:
        s, b = item
        split = cache.splits[s]
        scores = split.tensor.scores[[cache.bands.index(name) for name in band_subsets[b]]]
        out = np.empty((len(clf_subsets), len(pairs)))
        for freq in freq_aggs:
            collectives, _ = _frequency_phase(scores, freq)
            for ci, idx in enumerate(clf_index):
                chosen = collectives[idx]
                for p, cls_agg in pairs_by_freq[freq]:
                    final, _ = _classifier_phase(chosen, cls_agg)
                    out[ci, p] = _split_accuracy(final, split.labels)
        return out

    items = [(s, b) for s in range(len(cache.splits)) for b in range(len(band_subsets))]
    with ThreadPoolExecutor(max_workers=_workers(threads)) as pool:
        blocks = list(pool.map(work, items))
    per_split = np.stack(blocks).reshape(len(cache.splits), len(band_subsets), len(clf_subsets), len(pairs))
    means = per_split.mean(axis=0)
    stds = per_split.std(axis=0)
    order = _rank(means, band_subsets, clf_subsets)
    result = SearchResult(
        band_subsets=tuple(band_subsets),
        classifier_subsets=tuple(clf_subsets),
        agg_pairs=tuple(pairs),
        means=means,
        stds=stds,
        order=order,
    )
    best = result.best
    print(
        f"✅ Búsqueda completada: {result.n_configs} configuraciones; mejor {'+'.join(best.bands)} / "
        f"{'+'.join(c.value for c in best.classifiers)} / {best.freq_agg.value}-{best.class_agg.value}: "
        f"{best.accuracy:.4f}"
    )
    fallbacks = get_fallback_count() - fallbacks_before
    if fallbacks:
        print(f"ℹ️ Vectores nulos sustituidos por uniforme durante la búsqueda: {fallbacks}")
    return result


# ---------------------------------------------------------------------------
# Estudios complementarios
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrameworkRow:
    name: str
    accuracy: float
    std: float
    fusion: FusionConfig


def _best_of(rows: List[FrameworkRow]) -> FrameworkRow:
    # max() se queda con el primero en caso de empate
    return max(rows, key=lambda r: r.accuracy)


def compare_frameworks(
    trialset: TrialSet,
    plan: SplitPlan,
    pipeline_cfg: Optional[PipelineConfig] = None,
    threads: Optional[int] = None,
) -> List[FrameworkRow]:
    """
    Tabla comparativa de marcos de fusión sobre las mismas particiones:

    - trad-<clf>:      media de las bandas clásicas, potencia sin diferenciar
    - diff-<clf>:      lo mismo con potencia diferenciada
    - diff-<clf>-best: diferenciada, mejor agregador de la fase de frecuencia
    - mff:             LDA+QDA+KNN, bandas clásicas, mejor agregador común
    - emf:             todas las bandas y clasificadores, mejor par de la rejilla
    """
    base = pipeline_cfg or PipelineConfig()
    raw_cfg = replace(base, differentiate=False)
    diff_cfg = replace(base, differentiate=True)
    raw = score_splits(trialset, raw_cfg, plan, threads)
    diff = score_splits(trialset, diff_cfg, plan, threads)
    trad_bands = tuple(b for b in TRADITIONAL_BANDS if b in raw.bands) or raw.bands

    rows = []
    for clf in diff.classifiers:
        cfg = FusionConfig(trad_bands, (clf,), mode=FusionMode.TRADITIONAL)
        res = run_cv(None, cfg, plan, cache=raw)
        rows.append(FrameworkRow(f"trad-{clf.value}", res.mean, res.std, res.fusion))
    for clf in diff.classifiers:
        cfg = FusionConfig(trad_bands, (clf,), mode=FusionMode.TRADITIONAL)
        res = run_cv(None, cfg, plan, cache=diff)
        rows.append(FrameworkRow(f"diff-{clf.value}", res.mean, res.std, res.fusion))
    for clf in diff.classifiers:
        candidates = []
        for agg in AGGREGATORS:
            cfg = FusionConfig(trad_bands, (clf,), agg, AggregatorId.MEAN, FusionMode.EMF)
            res = run_cv(None, cfg, plan, cache=diff)
            candidates.append(FrameworkRow(f"diff-{clf.value}-best", res.mean, res.std, res.fusion))
        rows.append(_best_of(candidates))

    mff_clfs = tuple(c for c in MFF_CLASSIFIERS if c in raw.classifiers)
    if mff_clfs:
        candidates = []
        for agg in MFF_AGGREGATORS:
            res = run_cv(None, FusionConfig(trad_bands, mff_clfs, agg, agg, FusionMode.MFF), plan, cache=raw)
            candidates.append(FrameworkRow('mff', res.mean, res.std, res.fusion))
        rows.append(_best_of(candidates))

    grid = aggregator_grid(None, FusionConfig(diff.bands, diff.classifiers), plan, cache=diff, threads=threads)
    freq, cls_agg, _ = grid.best
    res = run_cv(None, FusionConfig(diff.bands, diff.classifiers, freq, cls_agg, FusionMode.EMF), plan, cache=diff)
    rows.append(FrameworkRow('emf', res.mean, res.std, res.fusion))
    return rows


def single_band_study(
    trialset: Optional[TrialSet],
    plan: SplitPlan,
    pipeline_cfg: Optional[PipelineConfig] = None,
    agg_pairs=None,
    threads: Optional[int] = None,
    cache: Optional[ScoreCache] = None,
) -> List[SearchEntry]:
    """Mejor subconjunto de clasificadores y par de agregadores para cada banda por separado."""
    if cache is None:
        cache = score_splits(trialset, pipeline_cfg or PipelineConfig(), plan, threads)
    return [
        oemf_search(None, plan, agg_pairs=agg_pairs, bands=[band], threads=threads, cache=cache).best
        for band in cache.bands
    ]


def csp_component_sweep(
    trialset: TrialSet,
    plan: SplitPlan,
    caps: Optional[Sequence[int]] = None,
    pipeline_cfg: Optional[PipelineConfig] = None,
    threads: Optional[int] = None,
) -> List[Tuple[int, CvResult]]:
    """Exactitud del marco tradicional SVM (diferenciado) según el tope de componentes CSP por banda."""
    base = pipeline_cfg or PipelineConfig()
    n_channels = trialset.samples.shape[1]
    caps = list(caps) if caps is not None else list(range(1, n_channels + 1))
    results = []
    for cap in caps:
        if cap < 1:
            raise ConfigError(f"CSP component cap must be >= 1, got {cap}")
        cfg = replace(
            base,
            classifiers=(ClassifierId.SVM,),
            differentiate=True,
            csp_components={band: cap for band in config.WAVE_BANDS},
        )
        cache = score_splits(trialset, cfg, plan, threads)
        res = run_cv(None, FusionConfig(cache.bands, (ClassifierId.SVM,), mode=FusionMode.TRADITIONAL), plan, cache=cache)
        print(f"ℹ️ Componentes CSP <= {cap}: {res.mean:.4f} ± {res.std:.4f}")
        results.append((cap, res))
    return results
