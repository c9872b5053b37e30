"""
Configuración del framework de fusión EMF para clasificación de imaginación motora
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Cargar variables de entorno desde el directorio del propio script
_ENV_PATH = Path(__file__).resolve().parent / ".env"
load_dotenv(_ENV_PATH, override=True)


def _parse_components(raw: str) -> dict:
    """Convierte 'delta:3,theta:4,...' en {'delta': 3, 'theta': 4, ...}."""
    result = {}
    for item in raw.split(','):
        item = item.strip()
        if not item:
            continue
        name, _, value = item.partition(':')
        result[name.strip().lower()] = int(value)
    return result


# Señal: ventana móvil de 50 puntos con solape de 45 (paso 5)
EMF_FS = float(os.getenv('EMF_FS', '250'))
WINDOW_LENGTH = int(os.getenv('EMF_WINDOW_LENGTH', '50'))
WINDOW_STEP = int(os.getenv('EMF_WINDOW_STEP', '5'))
BAND_EDGE_TOLERANCE = 1e-9

# Bandas de frecuencia (Hz, bordes inclusivos), en orden de catálogo
WAVE_BANDS = {
    'delta': (1.0, 3.0),
    'theta': (4.0, 7.0),
    'alpha': (8.0, 13.0),
    'beta': (14.0, 30.0),
    'smr': (13.0, 15.0),    # Sensory Motor Rhythm
    'all': (1.0, 30.0),
}

# CSP: componentes por banda (se recortan al número de canales)
CSP_COMPONENTS = _parse_components(
    os.getenv('EMF_CSP_COMPONENTS', 'delta:3,theta:4,alpha:6,beta:15,smr:3,all:25')
)
COV_RIDGE = float(os.getenv('EMF_COV_RIDGE', '1e-8'))
LOG_VAR_FLOOR = float(os.getenv('EMF_LOG_VAR_FLOOR', '1e-12'))

# Clasificadores
KNN_K = int(os.getenv('EMF_KNN_K', '5'))
DA_SHRINKAGE = float(os.getenv('EMF_DA_SHRINKAGE', '1e-3'))
DA_PRIORS = os.getenv('EMF_DA_PRIORS', 'uniform')  # 'uniform' o 'empirical'
SVM_C = float(os.getenv('EMF_SVM_C', '1.0'))
SVM_EPOCHS = int(os.getenv('EMF_SVM_EPOCHS', '500'))
SVM_STEP = float(os.getenv('EMF_SVM_STEP', '0.1'))
SVM_BATCH = int(os.getenv('EMF_SVM_BATCH', '32'))
GP_MAX_ITER = int(os.getenv('EMF_GP_MAX_ITER', '50'))
GP_TOL = float(os.getenv('EMF_GP_TOL', '1e-8'))
GP_JITTER = float(os.getenv('EMF_GP_JITTER', '1e-6'))

# Agregación
# Parámetros (a, b) del cuantificador Q_{a,b} de cada OWA
OWA_QUANTIFIERS = {
    'owa1': (0.1, 0.5),
    'owa2': (0.5, 1.0),
    'owa3': (0.3, 0.8),
}
# Par (F1, F2) por defecto de la generalización C_{F1,F2}
CF1F2_PAIR = tuple(
    p.strip() for p in os.getenv('EMF_CF1F2_PAIR', 'product,min').split(',')
)

# Ejecución
DEFAULT_SEED = int(os.getenv('EMF_SEED', '7'))
THREADS = int(os.getenv('EMF_THREADS', '0'))  # 0 = núcleos disponibles
OUTPUT_DIR = os.getenv('EMF_OUTPUT_DIR', 'results')
DEFAULT_FOLDS = 5

# Generador sintético (montaje del dataset UTS)
SYNTH_CHANNELS = ['C3', 'C4', 'CP3', 'CP4']
SYNTH_CLASSES = {
    2: ['left', 'right'],
    4: ['left', 'right', 'feet', 'tongue'],
}
SYNTH_RHYTHMS = {
    'mu': 10.0,    # Hz
    'beta': 20.0,  # Hz
}

# Formatos en disco
DATASET_FORMAT = 1
BUNDLE_FORMAT = 1
