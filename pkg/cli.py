"""
Punto de entrada por línea de comandos del framework EMF.

Subcomandos:
    synth     genera un dataset sintético y lo guarda (manifest + CSV)
    evaluate  validación cruzada de una configuración de fusión
    grid      rejilla 17x17 de pares de agregadores (CSV)
    search    búsqueda exhaustiva OEMF (ranking CSV)
    itr       tasa de transferencia de información desde un results.json
    qstat     estadístico Q de los clasificadores base desde un results.json
    train     ajusta con todo el dataset y guarda un bundle
    predict   aplica un bundle a un dataset
    compare   tabla comparativa de marcos de fusión
    sweep     barrido del número de componentes CSP

Códigos de salida: 0 éxito, 1 error de uso, 2 error de datos.
"""
import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

import config
from aggregation import AGGREGATORS, AggregatorId
from classifiers import CLASSIFIERS, Hyper
from data_service import load_bundle, load_dataset, load_results, save_bundle, save_dataset, select_classes, train_bundle
from dsp import TrialSet
from eeg_generator import SynthSpec, generate_synthetic
from errors import ConfigError, EMFError
from evaluation import (
    ItrInput,
    SplitPlan,
    aggregator_grid,
    base_correctness,
    compare_frameworks,
    csp_component_sweep,
    itr,
    oemf_search,
    q_statistic,
    run_cv,
    score_splits,
)
from fusion import FusionConfig, FusionMode
from pipeline import PipelineConfig
import reports

_SYNTH_DEFAULTS = SynthSpec()


class _Parser(argparse.ArgumentParser):
    """argparse con errores de uso -> código de salida 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"❌ {self.prog}: {message}\n")


def _tokens(raw: str) -> List[str]:
    return [t.strip() for t in raw.split(',') if t.strip()]


def _components(raw: Optional[str]) -> dict:
    counts = dict(config.CSP_COMPONENTS)
    if raw:
        for item in _tokens(raw):
            name, sep, value = item.partition(':')
            if not sep:
                raise ConfigError(f"CSP override '{item}' must look like band:count")
            try:
                counts[name.strip().lower()] = int(value)
            except ValueError:
                raise ConfigError(f"CSP override '{item}' has a non-integer count") from None
    return counts


def _agg_pairs(raw: Optional[str]) -> Optional[List[Tuple[AggregatorId, AggregatorId]]]:
    if not raw:
        return None
    pairs = []
    for item in _tokens(raw):
        freq, sep, cls_agg = item.partition(':')
        if not sep:
            raise ConfigError(f"aggregator pair '{item}' must look like freq_agg:class_agg")
        pairs.append((AggregatorId.parse(freq), AggregatorId.parse(cls_agg)))
    return pairs


@dataclass(frozen=True)
class RunConfig:
    """Configuración resuelta de una ejecución; se incrusta en results.json."""
    data: Optional[str]
    synth: Optional[SynthSpec]
    fusion: FusionConfig
    plan: SplitPlan
    pipeline: PipelineConfig
    out: str
    seed: int
    threads: int
    classes: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        if (self.data is None) == (self.synth is None):
            raise ConfigError("exactly one of a dataset path or a synthetic spec is required")

    def to_dict(self) -> dict:
        return {
            'data': self.data,
            'synth': self.synth.to_dict() if self.synth else None,
            'classes': list(self.classes),
            'fusion': self.fusion.to_dict(),
            'plan': self.plan.to_dict(),
            'pipeline': self.pipeline.to_dict(),
            'out': self.out,
            'seed': self.seed,
            'threads': self.threads,
        }


# ---------------------------------------------------------------------------
# Opciones compartidas
# ---------------------------------------------------------------------------

def _synth_options(parser: argparse.ArgumentParser, required_defaults: bool):
    d = _SYNTH_DEFAULTS
    default = (lambda v: v) if required_defaults else (lambda v: None)
    group = parser.add_argument_group('datos sintéticos')
    group.add_argument('--trials', type=int, default=default(d.n_trials), help=f"ensayos por clase (defecto {d.n_trials})")
    group.add_argument('--n-classes', type=int, choices=sorted(config.SYNTH_CLASSES), default=default(d.n_classes),
                       help=f"clases imaginadas (defecto {d.n_classes})")
    group.add_argument('--snr', type=float, default=default(d.snr), help=f"potencia ritmos / ruido (defecto {d.snr:g})")
    group.add_argument('--erd-depth', type=float, default=default(d.erd_depth),
                       help=f"atenuación contralateral en [0,1] (defecto {d.erd_depth:g})")
    group.add_argument('--duration', type=float, default=default(d.duration), help=f"segundos por ensayo (defecto {d.duration:g})")
    group.add_argument('--fs', type=float, default=default(d.fs), help=f"frecuencia de muestreo en Hz (defecto {d.fs:g})")
    group.add_argument('--am', type=float, default=default(d.amplitude_modulation),
                       help=f"profundidad de la modulación de amplitud (defecto {d.amplitude_modulation:g})")


def _data_parent() -> argparse.ArgumentParser:
    parent = _Parser(add_help=False)
    parent.add_argument('--data', help="directorio del dataset (manifest.json); sin él se genera uno sintético")
    parent.add_argument('--classes', help="subconjunto de clases, p. ej. left,right")
    _synth_options(parent, required_defaults=False)
    return parent


def _pipeline_parent() -> argparse.ArgumentParser:
    parent = _Parser(add_help=False)
    group = parent.add_argument_group('extracción y clasificadores')
    group.add_argument('--bands', default=','.join(config.WAVE_BANDS),
                       help=f"bandas (defecto {','.join(config.WAVE_BANDS)})")
    group.add_argument('--classifiers', default=','.join(c.value for c in CLASSIFIERS),
                       help=f"clasificadores (defecto {','.join(c.value for c in CLASSIFIERS)})")
    group.add_argument('--window', type=int, default=config.WINDOW_LENGTH,
                       help=f"puntos por ventana (defecto {config.WINDOW_LENGTH})")
    group.add_argument('--step', type=int, default=config.WINDOW_STEP,
                       help=f"avance entre ventanas (defecto {config.WINDOW_STEP})")
    group.add_argument('--no-diff', action='store_true', help="no diferenciar la potencia de banda")
    group.add_argument('--drift', type=float, default=0.0, help="escala de la deriva lineal sintética (defecto 0)")
    group.add_argument('--csp', help="componentes CSP por banda, p. ej. alpha:6,beta:15 (defecto "
                                     + ','.join(f"{b}:{n}" for b, n in config.CSP_COMPONENTS.items()) + ")")
    group.add_argument('--k', type=int, default=config.KNN_K, help=f"vecinos de KNN (defecto {config.KNN_K})")
    group.add_argument('--svm-c', type=float, default=config.SVM_C, help=f"C de la SVM (defecto {config.SVM_C:g})")
    return parent


def _fusion_parent() -> argparse.ArgumentParser:
    parent = _Parser(add_help=False)
    tokens = ','.join(a.value for a in AGGREGATORS)
    group = parent.add_argument_group('fusión')
    group.add_argument('--mode', default=FusionMode.EMF.value, choices=[m.value for m in FusionMode],
                       help="modo de fusión (defecto emf)")
    group.add_argument('--freq-agg', default=AggregatorId.MEAN.value, help=f"agregador de la fase de frecuencia ({tokens})")
    group.add_argument('--class-agg', default=AggregatorId.MEAN.value, help="agregador de la fase de clasificador")
    return parent


def _split_parent() -> argparse.ArgumentParser:
    parent = _Parser(add_help=False)
    group = parent.add_argument_group('particiones y ejecución')
    group.add_argument('--folds', type=int, default=config.DEFAULT_FOLDS,
                       help=f"k de la validación cruzada estratificada (defecto {config.DEFAULT_FOLDS})")
    group.add_argument('--holdout', type=int, metavar='REPS', help="usar REPS particiones aleatorias en vez de k-fold (p. ej. 20)")
    group.add_argument('--train-frac', type=float, default=0.5, help="fracción de entrenamiento con --holdout (defecto 0.5)")
    group.add_argument('--seed', type=int, default=config.DEFAULT_SEED, help=f"semilla (defecto {config.DEFAULT_SEED})")
    group.add_argument('--threads', type=int, default=config.THREADS, help="hilos (0 = núcleos disponibles)")
    group.add_argument('--out', default=config.OUTPUT_DIR, help=f"directorio de resultados (defecto {config.OUTPUT_DIR})")
    return parent


# ---------------------------------------------------------------------------
# Resolución de la configuración
# ---------------------------------------------------------------------------

def _synth_spec(args, seed: int) -> SynthSpec:
    d = _SYNTH_DEFAULTS
    pick = lambda value, fallback: fallback if value is None else value
    return SynthSpec(
        n_trials=pick(args.trials, d.n_trials),
        fs=pick(args.fs, d.fs),
        duration=pick(args.duration, d.duration),
        snr=pick(args.snr, d.snr),
        erd_depth=pick(args.erd_depth, d.erd_depth),
        seed=seed,
        n_classes=pick(args.n_classes, d.n_classes),
        amplitude_modulation=pick(args.am, d.amplitude_modulation),
    )


def _synth_flags_given(args) -> bool:
    return any(getattr(args, name) is not None for name in ('trials', 'n_classes', 'snr', 'erd_depth', 'duration', 'fs', 'am'))


def resolve_run(args) -> RunConfig:
    if args.data and _synth_flags_given(args):
        raise ConfigError("--data cannot be combined with synthetic-data flags")
    bands, classifiers = _tokens(args.bands), _tokens(args.classifiers)
    hyper = Hyper(k=args.k, svm_c=args.svm_c, seed=args.seed)
    pipeline = PipelineConfig(
        bands=tuple(bands),
        classifiers=tuple(classifiers),
        window=args.window,
        step=args.step,
        differentiate=not args.no_diff,
        csp_components=_components(args.csp),
        hyper=hyper,
        drift=args.drift,
        drift_seed=args.seed,
    )
    fusion = FusionConfig(
        bands=tuple(bands),
        classifiers=tuple(classifiers),
        freq_agg=getattr(args, 'freq_agg', 'mean'),
        class_agg=getattr(args, 'class_agg', 'mean'),
        mode=getattr(args, 'mode', 'emf'),
    )
    if args.holdout is not None:
        plan = SplitPlan.repeated_holdout(args.holdout, args.train_frac, args.seed)
    else:
        plan = SplitPlan.kfold(args.folds, args.seed)
    return RunConfig(
        data=args.data,
        synth=None if args.data else _synth_spec(args, args.seed),
        fusion=fusion,
        plan=plan,
        pipeline=pipeline,
        out=args.out,
        seed=args.seed,
        threads=args.threads,
        classes=tuple(_tokens(args.classes)) if args.classes else (),
    )


def load_trials(run: RunConfig) -> TrialSet:
    trialset = load_dataset(run.data) if run.data else generate_synthetic(run.synth)
    if run.classes:
        trialset = select_classes(trialset, run.classes)
    return trialset


def _results_base(command: str, run: RunConfig, trialset: TrialSet) -> dict:
    return {
        'command': command,
        'run': run.to_dict(),
        'dataset': {'name': trialset.name, 'trials': len(trialset), 'classes': list(trialset.classes)},
        'n_classes': trialset.n_classes,
    }


def _correctness_lists(cache) -> dict:
    return {name: vec.astype(int).tolist() for name, vec in base_correctness(cache).items()}


# ---------------------------------------------------------------------------
# Subcomandos
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    spec = SynthSpec(
        n_trials=args.trials,
        fs=args.fs,
        duration=args.duration,
        snr=args.snr,
        erd_depth=args.erd_depth,
        seed=args.seed,
        n_classes=args.n_classes,
        amplitude_modulation=args.am,
    )
    save_dataset(generate_synthetic(spec), args.out)
    return 0


def cmd_evaluate(args) -> int:
    run = resolve_run(args)
    trialset = load_trials(run)
    cache = score_splits(trialset, run.pipeline, run.plan, run.threads)
    result = run_cv(None, run.fusion, run.plan, cache=cache)
    print(f"✅ Exactitud media: {result.mean:.4f} ± {result.std:.4f} ({len(result.accuracies)} particiones)")
    data = _results_base('evaluate', run, trialset)
    data['cv'] = result.to_dict()
    data['n_test_trials'] = int(sum(item.labels.size for item in cache.splits))
    data['base_correctness'] = _correctness_lists(cache)
    reports.write_results(data, Path(run.out) / 'results.json')
    return 0


def cmd_grid(args) -> int:
    run = resolve_run(args)
    trialset = load_trials(run)
    cache = score_splits(trialset, run.pipeline, run.plan, run.threads)
    grid = aggregator_grid(None, run.fusion, run.plan, threads=run.threads, cache=cache)
    print(reports.format_grid(grid))
    reports.write_grid_csv(grid, Path(run.out) / 'grid.csv')
    freq, cls_agg, acc = grid.best
    data = _results_base('grid', run, trialset)
    data['grid'] = {
        'aggregators': [a.value for a in grid.aggregators],
        'matrix': grid.matrix.tolist(),
        'best': {'freq_agg': freq.value, 'class_agg': cls_agg.value, 'accuracy': acc},
    }
    data['n_test_trials'] = int(sum(item.labels.size for item in cache.splits))
    data['base_correctness'] = _correctness_lists(cache)
    reports.write_results(data, Path(run.out) / 'results.json')
    return 0


def cmd_search(args) -> int:
    run = resolve_run(args)
    trialset = load_trials(run)
    cache = score_splits(trialset, run.pipeline, run.plan, run.threads)
    result = oemf_search(None, run.plan, agg_pairs=_agg_pairs(args.pairs), threads=run.threads, cache=cache)
    print(f"ℹ️ Pares de subconjuntos (bandas x clasificadores): {result.n_subset_pairs}")
    print(reports.format_search(result.top(args.top)))
    reports.write_search_csv(result, Path(run.out) / 'search.csv', top=args.csv_top)
    data = _results_base('search', run, trialset)
    data['search'] = {
        'subset_pairs': result.n_subset_pairs,
        'configs': result.n_configs,
        'top': [e.to_dict() for e in result.top(args.top)],
    }
    data['n_test_trials'] = int(sum(item.labels.size for item in cache.splits))
    data['base_correctness'] = _correctness_lists(cache)
    reports.write_results(data, Path(run.out) / 'results.json')
    return 0


def _accuracy_of(results: dict) -> float:
    if 'cv' in results:
        return float(results['cv']['mean'])
    if 'grid' in results:
        return float(results['grid']['best']['accuracy'])
    if 'search' in results and results['search']['top']:
        return float(results['search']['top'][0]['accuracy'])
    raise ConfigError("results file carries no accuracy (run evaluate, grid or search first)")


def cmd_itr(args) -> int:
    results = load_results(args.results)
    accuracy = args.accuracy if args.accuracy is not None else _accuracy_of(results)
    observations = args.observations if args.observations is not None else results.get('n_test_trials')
    if observations is None:
        raise ConfigError("the results file has no trial count; pass --observations")
    bits, rate = itr(ItrInput(int(results['n_classes']), accuracy, float(observations), args.minutes))
    print(f"✅ B = {bits:.4f} bits/ensayo, ITR = {rate:.2f} bits/min (N={results['n_classes']}, P={accuracy:.4f})")
    return 0


def cmd_qstat(args) -> int:
    results = load_results(args.results)
    vectors = results.get('base_correctness')
    if not vectors:
        raise ConfigError("the results file has no base classifier correctness vectors")
    q = q_statistic([np.asarray(v, dtype=bool) for v in vectors.values()])
    print(f"✅ Estadístico Q del sistema ({len(vectors)} clasificadores base): {q:.4f}")
    return 0


def cmd_train(args) -> int:
    run = resolve_run(args)
    trialset = load_trials(run)
    bundle = train_bundle(trialset, run.fusion, run.pipeline)
    save_bundle(bundle, args.bundle or Path(run.out) / 'model.json')
    return 0


def cmd_predict(args) -> int:
    trialset = load_dataset(args.data)
    if args.classes:
        trialset = select_classes(trialset, _tokens(args.classes))
    bundle = load_bundle(args.bundle, expected_channels=trialset.channels)
    result = bundle.predict(trialset)
    names = [bundle.classes[int(d)] for d in result.decisions]
    accuracy = result.accuracy(trialset.labels) if tuple(trialset.classes) == bundle.classes else None
    if accuracy is not None:
        print(f"✅ Exactitud sobre {len(trialset)} ensayos: {accuracy:.4f}")
    data = {
        'command': 'predict',
        'bundle': str(args.bundle),
        'data': args.data,
        'predictions': names,
        'scores': result.scores,
        'accuracy': accuracy,
    }
    reports.write_results(data, Path(args.out) / 'predictions.json')
    return 0


def cmd_compare(args) -> int:
    run = resolve_run(args)
    trialset = load_trials(run)
    rows = compare_frameworks(trialset, run.plan, run.pipeline, run.threads)
    print(reports.format_frameworks(rows))
    data = _results_base('compare', run, trialset)
    data['frameworks'] = reports.frameworks_to_dict(rows)
    reports.write_results(data, Path(run.out) / 'results.json')
    return 0


def cmd_sweep(args) -> int:
    run = resolve_run(args)
    trialset = load_trials(run)
    caps = [int(c) for c in _tokens(args.caps)] if args.caps else None
    sweep = csp_component_sweep(trialset, run.plan, caps, run.pipeline, run.threads)
    reports.write_sweep_csv(sweep, Path(run.out) / 'sweep.csv')
    return 0


def build_parser() -> argparse.ArgumentParser:
    formatter = argparse.RawDescriptionHelpFormatter
    parser = _Parser(prog='emf', description=__doc__, formatter_class=formatter)
    sub = parser.add_subparsers(dest='command', required=True, metavar='subcomando')
    data, pipe, fusion, split = _data_parent(), _pipeline_parent(), _fusion_parent(), _split_parent()

    p = sub.add_parser('synth', help="genera un dataset sintético")
    _synth_options(p, required_defaults=True)
    p.add_argument('--seed', type=int, default=config.DEFAULT_SEED, help=f"semilla (defecto {config.DEFAULT_SEED})")
    p.add_argument('--out', required=True, help="directorio de salida del dataset")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser('evaluate', parents=[data, pipe, fusion, split], help="validación cruzada de una configuración")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser('grid', parents=[data, pipe, split], help="rejilla 17x17 de pares de agregadores")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser('search', parents=[data, pipe, split], help="búsqueda exhaustiva OEMF")
    p.add_argument('--pairs', help="lista restringida de pares freq:class, p. ej. choquet:min,mean:mean (defecto: los 289)")
    p.add_argument('--top', type=int, default=10, help="configuraciones mostradas en consola (defecto 10)")
    p.add_argument('--csv-top', type=int, default=100, help="filas del CSV de ranking (defecto 100)")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser('itr', help="ITR desde un results.json")
    p.add_argument('--results', required=True, help="results.json de evaluate, grid o search")
    p.add_argument('--minutes', type=float, required=True, help="tiempo total T en minutos")
    p.add_argument('--observations', type=float, help="observaciones S en ese tiempo (defecto: ensayos de test)")
    p.add_argument('--accuracy', type=float, help="exactitud P (defecto: la del fichero)")
    p.set_defaults(func=cmd_itr)

    p = sub.add_parser('qstat', help="estadístico Q desde un results.json")
    p.add_argument('--results', required=True, help="results.json de evaluate, grid o search")
    p.set_defaults(func=cmd_qstat)

    p = sub.add_parser('train', parents=[data, pipe, fusion, split], help="ajusta con todo el dataset y guarda un bundle")
    p.add_argument('--bundle', help="ruta del bundle (defecto <out>/model.json)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser('predict', help="aplica un bundle a un dataset")
    p.add_argument('--bundle', required=True, help="bundle escrito por train")
    p.add_argument('--data', required=True, help="directorio del dataset")
    p.add_argument('--classes', help="subconjunto de clases, p. ej. left,right")
    p.add_argument('--out', default=config.OUTPUT_DIR, help=f"directorio de resultados (defecto {config.OUTPUT_DIR})")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser('compare', parents=[data, pipe, split], help="tabla comparativa de marcos de fusión")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser('sweep', parents=[data, pipe, split], help="barrido de componentes CSP (SVM tradicional)")
    p.add_argument('--caps', help="topes a probar, p. ej. 1,2,3,4 (defecto 1..canales)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except EMFError as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == '__main__':
    sys.exit(main())
