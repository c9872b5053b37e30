"""
Módulo para generar EEG sintético de imaginación motora.

Cada ensayo es ruido 1/f (ruido blanco conformado espectralmente) más ritmos
mu (10 Hz) y beta (20 Hz) con envolvente lenta. La clase imaginada atenúa
esos ritmos en los canales contralaterales (ERD):

- left:   C4 y CP4 (hemisferio derecho)
- right:  C3 y CP3 (hemisferio izquierdo)
- feet:   beta atenuado en todos los canales
- tongue: mu reforzado en todos los canales (ERS)
"""
import math
from dataclasses import asdict, dataclass
from typing import Dict, Tuple

import numpy as np

import config
from dsp import TrialSet
from errors import OutOfRangeError

# Amplitud relativa de cada ritmo respecto a mu
_RHYTHM_RATIO = {'mu': 1.0, 'beta': 0.5}

_CONTRALATERAL = {
    'left': ('C4', 'CP4'),
    'right': ('C3', 'CP3'),
}


@dataclass(frozen=True)
class SynthSpec:
    n_trials: int = 100         # por clase
    fs: float = config.EMF_FS
    duration: float = 2.0       # segundos
    snr: float = 4.0            # potencia de los ritmos / potencia del ruido
    erd_depth: float = 0.8
    seed: int = config.DEFAULT_SEED
    n_classes: int = 2
    amplitude_modulation: float = 0.5
    freq_jitter: float = 0.5    # Hz

    def __post_init__(self):
        if self.n_trials < 4:
            raise OutOfRangeError(f"at least 4 trials per class are required, got {self.n_trials}")
        if not 0.0 <= self.erd_depth <= 1.0:
            raise OutOfRangeError(f"erd_depth must be in [0, 1], got {self.erd_depth}")
        if self.snr <= 0:
            raise OutOfRangeError(f"snr must be positive, got {self.snr}")
        if self.n_classes not in config.SYNTH_CLASSES:
            raise OutOfRangeError(
                f"synthetic data supports {sorted(config.SYNTH_CLASSES)} classes, got {self.n_classes}"
            )
        if not 0.0 <= self.amplitude_modulation < 1.0:
            raise OutOfRangeError(f"amplitude_modulation must be in [0, 1), got {self.amplitude_modulation}")
        if self.duration <= 0:
            raise OutOfRangeError(f"duration must be positive, got {self.duration}")
        if self.freq_jitter < 0:
            raise OutOfRangeError(f"freq_jitter must be nonnegative, got {self.freq_jitter}")

    def to_dict(self) -> dict:
        return asdict(self)


def pink_noise(rng: np.random.Generator, shape: Tuple[int, ...], fs: float) -> np.ndarray:
    """
    Ruido 1/f de varianza unidad a lo largo del último eje.

    Se conforma el espectro de ruido blanco con 1/sqrt(f) (potencia 1/f),
    se anula la componente continua y se vuelve al tiempo con la DFT inversa.
    """
    n_samples = shape[-1]
    spectrum = np.fft.rfft(rng.standard_normal(shape), axis=-1)
    freqs = np.fft.rfftfreq(n_samples, d=1.0 / fs)
    shaping = np.zeros_like(freqs)
    shaping[1:] = 1.0 / np.sqrt(freqs[1:])
    noise = np.fft.irfft(spectrum * shaping, n=n_samples, axis=-1)
    noise -= noise.mean(axis=-1, keepdims=True)
    return noise / noise.std(axis=-1, keepdims=True)


def rhythm_gains(class_name: str, erd_depth: float, channels=tuple(config.SYNTH_CHANNELS)) -> Dict[str, np.ndarray]:
    """Ganancia de cada ritmo en cada canal para una clase imaginada."""
    gains = {rhythm: np.ones(len(channels)) for rhythm in _RHYTHM_RATIO}
    if class_name in _CONTRALATERAL:
        idx = [i for i, ch in enumerate(channels) if ch in _CONTRALATERAL[class_name]]
        for rhythm in gains:
            gains[rhythm][idx] *= 1.0 - erd_depth
    elif class_name == 'feet':
        gains['beta'] *= 1.0 - erd_depth
    elif class_name == 'tongue':
        gains['mu'] *= 1.0 + erd_depth
    return gains


def rhythm_amplitude(snr: float, amplitude_modulation: float) -> float:
    """Amplitud de mu tal que (potencia de ritmos) / (potencia del ruido unidad) = snr."""
    envelope_power = 1.0 + amplitude_modulation ** 2 / 2.0
    ratio_power = sum(r ** 2 for r in _RHYTHM_RATIO.values())
    return math.sqrt(2.0 * snr / (ratio_power * envelope_power))


def generate_synthetic(spec: SynthSpec = None) -> TrialSet:
    """
    Genera un dataset sintético determinista (PCG64 sembrado).

    Args:
        spec: parámetros del generador (SynthSpec por defecto si se omite)

    Returns:
        TrialSet con canales C3, C4, CP3, CP4 y clases intercaladas
    """
    spec = spec or SynthSpec()
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    channels = tuple(config.SYNTH_CHANNELS)
    classes = tuple(config.SYNTH_CLASSES[spec.n_classes])
    n_samples = int(round(spec.duration * spec.fs))
    n_total = spec.n_trials * len(classes)
    labels = np.tile(np.arange(len(classes)), spec.n_trials)
    t = np.arange(n_samples) / spec.fs

    samples = pink_noise(rng, (n_total, len(channels), n_samples), spec.fs)
    base = rhythm_amplitude(spec.snr, spec.amplitude_modulation)
    class_gains = [rhythm_gains(name, spec.erd_depth, channels) for name in classes]
    shape = (n_total, len(channels), 1)

    for rhythm, freq in config.SYNTH_RHYTHMS.items():
        gains = np.stack([class_gains[label][rhythm] for label in labels])[..., None]
        freqs = freq + rng.uniform(-spec.freq_jitter, spec.freq_jitter, size=(n_total, 1, 1))
        phase = rng.uniform(0.0, 2.0 * np.pi, size=shape)
        am_rate = rng.uniform(0.5, 2.0, size=shape)
        am_phase = rng.uniform(0.0, 2.0 * np.pi, size=shape)
        envelope = 1.0 + spec.amplitude_modulation * np.sin(2.0 * np.pi * am_rate * t + am_phase)
        amplitude = base * _RHYTHM_RATIO[rhythm]
        samples += amplitude * gains * envelope * np.sin(2.0 * np.pi * freqs * t + phase)

    print(
        f"✅ Dataset sintético: {n_total} ensayos ({', '.join(classes)}), "
        f"{n_samples} muestras a {spec.fs:g} Hz, semilla {spec.seed}"
    )
    return TrialSet(
        samples=samples,
        labels=labels,
        fs=float(spec.fs),
        channels=channels,
        classes=classes,
        name=f"synth-{spec.seed}",
    )
