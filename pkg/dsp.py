"""
Procesado de señal: potencia por banda con FFT sobre ventana móvil y diferenciación.

Cada canal se trocea en ventanas de WINDOW_LENGTH muestras que avanzan
WINDOW_STEP muestras (50 y 5 por defecto: solape de 45 puntos). En cada
ventana la potencia de banda es la media de |X_k|^2 sobre los bins DFT
cuya frecuencia k·fs/L cae dentro de la banda (bordes inclusivos).
"""
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

import config
from errors import (
    ConfigError,
    DimensionError,
    EmptyBandError,
    InvalidSamplingRateError,
    TooShortError,
)

# Nyquist para la banda más alta (30 Hz)
MIN_FS = 2.0 * max(hi for _, hi in config.WAVE_BANDS.values())


@dataclass(frozen=True)
class WaveBand:
    name: str
    lo_hz: float
    hi_hz: float


@dataclass(frozen=True)
class Trial:
    samples: np.ndarray  # canales x tiempo
    fs: float
    label: int


@dataclass(frozen=True)
class TrialSet:
    """Ensayos etiquetados: samples tiene forma (ensayos, canales, tiempo)."""
    samples: np.ndarray
    labels: np.ndarray
    fs: float
    channels: Tuple[str, ...]
    classes: Tuple[str, ...]
    name: str = 'dataset'

    def __post_init__(self):
        if self.fs <= 0:
            raise InvalidSamplingRateError(f"sampling rate must be positive, got {self.fs}")
        if self.fs <= MIN_FS:
            raise InvalidSamplingRateError(
                f"sampling rate {self.fs} Hz cannot resolve bands up to {MIN_FS / 2:g} Hz"
            )
        if self.samples.ndim != 3:
            raise DimensionError(f"samples must be trials x channels x time, got shape {self.samples.shape}")
        if self.samples.shape[1] < 2:
            raise DimensionError(f"at least 2 channels are required, got {self.samples.shape[1]}")
        if self.samples.shape[1] != len(self.channels):
            raise DimensionError(
                f"{self.samples.shape[1]} channels in data but {len(self.channels)} channel names"
            )
        if len(self.labels) != self.samples.shape[0]:
            raise DimensionError(f"{len(self.labels)} labels for {self.samples.shape[0]} trials")

    def __len__(self) -> int:
        return int(self.samples.shape[0])

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def trial(self, index: int) -> Trial:
        return Trial(samples=self.samples[index], fs=self.fs, label=int(self.labels[index]))


@dataclass(frozen=True)
class BandPowerSeries:
    """Serie de potencia de una banda: canales x ventanas (negativa tras diferenciar)."""
    band: WaveBand
    power: np.ndarray
    differenced: bool = False

    @property
    def windows(self) -> int:
        return int(self.power.shape[-1])


def band_catalog() -> List[WaveBand]:
    """Las seis bandas en orden fijo: delta, theta, alpha, beta, smr, all."""
    return [WaveBand(name, lo, hi) for name, (lo, hi) in config.WAVE_BANDS.items()]


def get_band(name: Union[str, WaveBand]) -> WaveBand:
    if isinstance(name, WaveBand):
        return name
    key = str(name).strip().lower()
    if key not in config.WAVE_BANDS:
        raise ConfigError(f"unknown band '{name}' (valid: {', '.join(config.WAVE_BANDS)})")
    lo, hi = config.WAVE_BANDS[key]
    return WaveBand(key, lo, hi)


def frame_count(n_samples: int, window: int, step: int) -> int:
    if n_samples < window:
        return 0
    return (n_samples - window) // step + 1


def _frames(samples: np.ndarray, window: int, step: int) -> np.ndarray:
    """(..., T) -> (..., ventanas, window)."""
    if window < 2 or step < 1:
        raise ConfigError(f"invalid window/step {window}/{step}")
    if samples.shape[-1] < window:
        raise TooShortError(
            f"trial has {samples.shape[-1]} samples, shorter than the {window}-point window"
        )
    return sliding_window_view(samples, window, axis=-1)[..., ::step, :]


def window_spectrum(frames: np.ndarray) -> np.ndarray:
    """|X_k|^2 de la DFT completa de cada ventana (último eje)."""
    return np.abs(np.fft.fft(frames, axis=-1)) ** 2


def band_bins(fs: float, window: int, band: WaveBand) -> np.ndarray:
    """Bins k (no negativos) con lo <= k·fs/window <= hi."""
    freqs = np.fft.rfftfreq(window, d=1.0 / fs)
    tol = config.BAND_EDGE_TOLERANCE
    bins = np.flatnonzero((freqs >= band.lo_hz - tol) & (freqs <= band.hi_hz + tol))
    if bins.size == 0:
        raise EmptyBandError(
            f"band '{band.name}' [{band.lo_hz:g}, {band.hi_hz:g}] Hz has no DFT bin at "
            f"fs={fs:g} Hz with a {window}-point window (bin spacing {fs / window:g} Hz); "
            f"raise EMF_WINDOW_LENGTH"
        )
    return bins


def resolvable_bands(fs: float, window: int, bands: Iterable[WaveBand]) -> List[WaveBand]:
    result = []
    for band in bands:
        try:
            band_bins(fs, window, band)
        except EmptyBandError:
            continue
        result.append(band)
    return result


def band_power_batch(
    samples: np.ndarray,
    fs: float,
    band: WaveBand,
    window: Optional[int] = None,
    step: Optional[int] = None,
) -> np.ndarray:
    """
    Potencia de banda vectorizada sobre ensayos y canales.

    Args:
        samples: array (..., canales, tiempo)
        fs: frecuencia de muestreo en Hz
        band: banda a extraer
        window: longitud de ventana (por defecto config.WINDOW_LENGTH)
        step: avance entre ventanas (por defecto config.WINDOW_STEP)

    Returns:
        Array (..., canales, ventanas) de potencias no negativas
    """
    window = window or config.WINDOW_LENGTH
    step = step or config.WINDOW_STEP
    bins = band_bins(fs, window, band)
    frames = _frames(np.asarray(samples, dtype=float), window, step)
    spectrum = np.abs(np.fft.rfft(frames, axis=-1)) ** 2
    return spectrum[..., bins].mean(axis=-1)


def band_power(
    trial: Trial,
    band: WaveBand,
    window: Optional[int] = None,
    step: Optional[int] = None,
) -> BandPowerSeries:
    if trial.samples.ndim != 2 or trial.samples.shape[0] < 2:
        raise DimensionError(f"trial must be channels x time with >= 2 channels, got {trial.samples.shape}")
    if trial.fs <= MIN_FS:
        raise InvalidSamplingRateError(f"sampling rate {trial.fs} Hz is below {MIN_FS:g} Hz")
    power = band_power_batch(trial.samples, trial.fs, band, window, step)
    return BandPowerSeries(band=band, power=power)


def differentiate(series: Union[BandPowerSeries, np.ndarray]):
    """
    Primera diferencia a lo largo de las ventanas: out[c][t] = p[c][t+1] - p[c][t].

    Acepta un BandPowerSeries (devuelve otro, marcado como diferenciado) o un
    array cuyo último eje son las ventanas.
    """
    power = series.power if isinstance(series, BandPowerSeries) else np.asarray(series, dtype=float)
    if power.shape[-1] < 2:
        raise TooShortError(f"differentiation needs at least 2 windows, got {power.shape[-1]}")
    diff = np.diff(power, axis=-1)
    if isinstance(series, BandPowerSeries):
        return BandPowerSeries(band=series.band, power=diff, differenced=True)
    return diff


def inject_power_drift(power: np.ndarray, scale: float, seed: int) -> np.ndarray:
    """
    Suma una tendencia lineal a series de potencia (ensayos, canales, ventanas).

    Cada (ensayo, canal) recibe una pendiente aleatoria en [-1, 1] cuyo
    recorrido total a lo largo del ensayo es scale veces la potencia media del
    ensayo (todos los canales), no la de cada canal.
    """
    power = np.asarray(power, dtype=float)
    if scale == 0.0:
        return power
    rng = np.random.Generator(np.random.PCG64(seed))
    n_windows = power.shape[-1]
    slopes = rng.uniform(-1.0, 1.0, size=power.shape[:-1])
    rise = slopes * scale * power.mean(axis=(-2, -1), keepdims=True)[..., 0]
    ramp = np.arange(n_windows) / max(n_windows - 1, 1)
    return power + rise[..., None] * ramp
