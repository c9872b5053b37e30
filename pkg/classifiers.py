"""
Los cinco tipos de clasificador base del conjunto: LDA, QDA, KNN, SVM y GP.

Todos comparten el contrato fit(...) -> modelo inmutable y
predict_scores(modelo, x) -> puntuaciones por clase en [0,1] que suman 1.
"""
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg
from scipy.optimize import minimize
from scipy.spatial.distance import cdist, pdist
from scipy.special import expit, softmax

import config
from errors import ConfigError, DimensionError, InsufficientDataError


class ClassifierId(str, Enum):
    LDA = 'lda'
    QDA = 'qda'
    KNN = 'knn'
    SVM = 'svm'
    GP = 'gp'

    @classmethod
    def parse(cls, token) -> 'ClassifierId':
        if isinstance(token, cls):
            return token
        try:
            return cls(str(token).strip().lower())
        except ValueError:
            valid = ', '.join(c.value for c in cls)
            raise ConfigError(f"unknown classifier '{token}' (valid: {valid})") from None


CLASSIFIERS = tuple(ClassifierId)


@dataclass(frozen=True)
class Hyper:
    """Hiperparámetros de los clasificadores (valores por defecto desde config)."""
    k: int = config.KNN_K
    shrinkage: float = config.DA_SHRINKAGE
    priors: str = config.DA_PRIORS
    svm_c: float = config.SVM_C
    svm_epochs: int = config.SVM_EPOCHS
    svm_step: float = config.SVM_STEP
    svm_batch: int = config.SVM_BATCH
    gp_max_iter: int = config.GP_MAX_ITER
    gp_tol: float = config.GP_TOL
    gp_jitter: float = config.GP_JITTER
    seed: int = config.DEFAULT_SEED

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'Hyper':
        return cls(**data)


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    n_classes: int

    def __post_init__(self):
        if self.X.ndim != 2:
            raise DimensionError(f"X must be trials x features, got shape {self.X.shape}")
        if self.X.shape[1] < 1:
            raise DimensionError("at least one feature is required")
        if len(self.y) != self.X.shape[0]:
            raise DimensionError(f"{self.X.shape[0]} rows but {len(self.y)} labels")
        if self.n_classes < 2:
            raise InsufficientDataError(f"at least two classes are required, got {self.n_classes}")

    def check_trainable(self):
        counts = np.bincount(self.y.astype(int), minlength=self.n_classes)
        short = [k for k, c in enumerate(counts[:self.n_classes]) if c < 2]
        if short:
            raise InsufficientDataError(f"classes {short} have fewer than 2 training samples")


# --- Modelos ---

@dataclass(frozen=True)
class GaussianModel:
    """LDA (precisión compartida) o QDA (una por clase)."""
    kind: ClassifierId
    means: np.ndarray        # (K, d)
    precisions: np.ndarray   # (K, d, d)
    log_norms: np.ndarray    # (K,)
    log_priors: np.ndarray   # (K,)

    @property
    def n_features(self) -> int:
        return int(self.means.shape[1])

    @property
    def n_classes(self) -> int:
        return int(self.means.shape[0])


@dataclass(frozen=True)
class KnnModel:
    kind: ClassifierId
    X: np.ndarray
    y: np.ndarray
    k: int
    n_classes: int

    @property
    def n_features(self) -> int:
        return int(self.X.shape[1])


@dataclass(frozen=True)
class SvmModel:
    kind: ClassifierId
    mean: np.ndarray
    scale: np.ndarray
    weights: np.ndarray      # (K, d) una máquina por clase
    bias: np.ndarray         # (K,)
    platt_a: np.ndarray      # (K,)
    platt_b: np.ndarray      # (K,)
    n_classes: int

    @property
    def n_features(self) -> int:
        return int(self.mean.shape[0])


@dataclass(frozen=True)
class GpModel:
    kind: ClassifierId
    X: np.ndarray
    lengthscale: float
    signal_var: float
    grads: np.ndarray        # (M, n) t - π en la moda
    sqrt_w: np.ndarray       # (M, n)
    chols: np.ndarray        # (M, n, n) Cholesky de I + W^½ K W^½
    targets: Tuple[int, ...]  # clase positiva de cada máquina
    n_classes: int

    @property
    def n_features(self) -> int:
        return int(self.X.shape[1])


_ARRAY_FIELDS = {
    'means', 'precisions', 'log_norms', 'log_priors', 'X', 'y', 'mean', 'scale',
    'weights', 'bias', 'platt_a', 'platt_b', 'grads', 'sqrt_w', 'chols',
}
_MODEL_TYPES = {
    ClassifierId.LDA: GaussianModel,
    ClassifierId.QDA: GaussianModel,
    ClassifierId.KNN: KnnModel,
    ClassifierId.SVM: SvmModel,
    ClassifierId.GP: GpModel,
}


def model_to_dict(model) -> dict:
    data = {}
    for name, value in vars(model).items():
        if isinstance(value, np.ndarray):
            data[name] = value.tolist()
        elif isinstance(value, ClassifierId):
            data[name] = value.value
        elif isinstance(value, tuple):
            data[name] = list(value)
        else:
            data[name] = value
    return data


def model_from_dict(data: dict):
    kind = ClassifierId.parse(data['kind'])
    fields = {}
    for name, value in data.items():
        if name == 'kind':
            fields[name] = kind
        elif name in _ARRAY_FIELDS:
            fields[name] = np.asarray(value, dtype=int if name == 'y' else float)
        elif name == 'targets':
            fields[name] = tuple(int(v) for v in value)
        else:
            fields[name] = value
    return _MODEL_TYPES[kind](**fields)


# --- Utilidades ---

def _shrink(cov: np.ndarray, shrinkage: float) -> np.ndarray:
    d = cov.shape[0]
    trace = float(np.trace(cov))
    ridge = shrinkage * (trace / d if trace > 0 else 1.0)
    return cov + ridge * np.eye(d)


def _log_priors(y: np.ndarray, n_classes: int, priors: str) -> np.ndarray:
    if priors == 'uniform':
        return np.full(n_classes, -math.log(n_classes))
    if priors == 'empirical':
        counts = np.bincount(y, minlength=n_classes).astype(float)
        return np.log(counts / counts.sum())
    raise ConfigError(f"unknown prior mode '{priors}' (valid: uniform, empirical)")


def _normalise(scores: np.ndarray) -> np.ndarray:
    scores = np.clip(scores, 0.0, 1.0)
    totals = scores.sum(axis=-1, keepdims=True)
    uniform = np.full_like(scores, 1.0 / scores.shape[-1])
    safe = np.where(totals > 0, totals, 1.0)
    return np.where(totals > 0, scores / safe, uniform)


def _generator(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


# --- Entrenamiento ---

def _fit_lda(data: Dataset, hyper: Hyper) -> GaussianModel:
    K = data.n_classes
    means = np.stack([data.X[data.y == k].mean(axis=0) for k in range(K)])
    resid = data.X - means[data.y]
    cov = resid.T @ resid / max(len(data.X) - K, 1)
    precision = linalg.inv(_shrink(cov, hyper.shrinkage))
    precision = 0.5 * (precision + precision.T)
    return GaussianModel(
        kind=ClassifierId.LDA,
        means=means,
        precisions=np.repeat(precision[None], K, axis=0),
        log_norms=np.zeros(K),
        log_priors=_log_priors(data.y, K, hyper.priors),
    )


def _fit_qda(data: Dataset, hyper: Hyper) -> GaussianModel:
    K = data.n_classes
    means, precisions, log_norms = [], [], []
    for k in range(K):
        Xk = data.X[data.y == k]
        mu = Xk.mean(axis=0)
        resid = Xk - mu
        cov = _shrink(resid.T @ resid / (len(Xk) - 1), hyper.shrinkage)
        _, logdet = np.linalg.slogdet(cov)
        precision = linalg.inv(cov)
        means.append(mu)
        precisions.append(0.5 * (precision + precision.T))
        log_norms.append(-0.5 * logdet)
    return GaussianModel(
        kind=ClassifierId.QDA,
        means=np.stack(means),
        precisions=np.stack(precisions),
        log_norms=np.asarray(log_norms),
        log_priors=_log_priors(data.y, K, hyper.priors),
    )


def _fit_knn(data: Dataset, hyper: Hyper) -> KnnModel:
    if hyper.k < 1:
        raise ConfigError(f"k must be >= 1, got {hyper.k}")
    return KnnModel(
        kind=ClassifierId.KNN,
        X=data.X.copy(),
        y=data.y.astype(int).copy(),
        k=int(hyper.k),
        n_classes=data.n_classes,
    )


def _train_hinge(Z: np.ndarray, t: np.ndarray, hyper: Hyper) -> Tuple[np.ndarray, float]:
    """Subgradiente por mini-lotes de ½λ‖w‖² + media(hinge), λ = 1/(C·n)."""
    n, d = Z.shape
    lam = 1.0 / (hyper.svm_c * n)
    w = np.zeros(d)
    b = 0.0
    # Misma secuencia de barajado para todas las máquinas
    rng = _generator(hyper.seed)
    for epoch in range(1, hyper.svm_epochs + 1):
        eta = hyper.svm_step / math.sqrt(epoch)
        order = rng.permutation(n)
        for start in range(0, n, hyper.svm_batch):
            idx = order[start:start + hyper.svm_batch]
            tb = t[idx]
            viol = tb * (Z[idx] @ w + b) < 1.0
            grad_w = lam * w - (tb[viol, None] * Z[idx][viol]).sum(axis=0) / len(idx)
            grad_b = -tb[viol].sum() / len(idx)
            w = w - eta * grad_w
            b = b - eta * grad_b
    return w, b


def _fit_platt(decision: np.ndarray, positive: np.ndarray) -> Tuple[float, float]:
    """Sigmoide de Platt P = 1 / (1 + exp(A·f + B)) con objetivos suavizados."""
    n_pos = int(positive.sum())
    n_neg = len(positive) - n_pos
    target = np.where(positive, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))

    def loss(params):
        a, b = params
        z = a * decision + b
        # log p = -log(1 + e^z), log(1 - p) = z - log(1 + e^z)
        log1pexp = np.logaddexp(0.0, z)
        value = np.sum(log1pexp - (1.0 - target) * z)
        p = expit(-z)
        dz = (1.0 - p) - (1.0 - target)
        return value, np.array([np.sum(dz * decision), np.sum(dz)])

    start = np.array([0.0, math.log((n_neg + 1.0) / (n_pos + 1.0))])
    result = minimize(loss, start, jac=True, method='L-BFGS-B')
    return float(result.x[0]), float(result.x[1])


def _fit_svm(data: Dataset, hyper: Hyper) -> SvmModel:
    mean = data.X.mean(axis=0)
    scale = data.X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    Z = (data.X - mean) / scale
    weights, bias, platt_a, platt_b = [], [], [], []
    for k in range(data.n_classes):
        positive = data.y == k
        w, b = _train_hinge(Z, np.where(positive, 1.0, -1.0), hyper)
        a, c = _fit_platt(Z @ w + b, positive)
        weights.append(w)
        bias.append(b)
        platt_a.append(a)
        platt_b.append(c)
    return SvmModel(
        kind=ClassifierId.SVM,
        mean=mean,
        scale=scale,
        weights=np.stack(weights),
        bias=np.asarray(bias),
        platt_a=np.asarray(platt_a),
        platt_b=np.asarray(platt_b),
        n_classes=data.n_classes,
    )


def _rbf(A: np.ndarray, B: np.ndarray, lengthscale: float, signal_var: float) -> np.ndarray:
    sq = cdist(A, B, 'sqeuclidean')
    return signal_var * np.exp(-0.5 * sq / lengthscale ** 2)


def _median_lengthscale(X: np.ndarray) -> float:
    if len(X) < 2:
        return 1.0
    med = float(np.median(pdist(X)))
    return med if med > 0 and math.isfinite(med) else 1.0


def _laplace_mode(K: np.ndarray, positive: np.ndarray, hyper: Hyper):
    """Moda del posterior latente por Newton (clasificación binaria, verosimilitud logística)."""
    n = len(positive)
    t = positive.astype(float)
    f = np.zeros(n)
    for _ in range(hyper.gp_max_iter):
        pi = expit(f)
        sqrt_w = np.sqrt(pi * (1.0 - pi))
        B = np.eye(n) + sqrt_w[:, None] * K * sqrt_w[None, :]
        L = linalg.cholesky(B, lower=True)
        b = pi * (1.0 - pi) * f + (t - pi)
        a = b - sqrt_w * linalg.cho_solve((L, True), sqrt_w * (K @ b))
        f_new = K @ a
        step = float(np.max(np.abs(f_new - f)))
        f = f_new
        if step < hyper.gp_tol:
            break
    pi = expit(f)
    sqrt_w = np.sqrt(pi * (1.0 - pi))
    B = np.eye(n) + sqrt_w[:, None] * K * sqrt_w[None, :]
    return t - pi, sqrt_w, linalg.cholesky(B, lower=True)


def _fit_gp(data: Dataset, hyper: Hyper) -> GpModel:
    lengthscale = _median_lengthscale(data.X)
    signal_var = 1.0
    K = _rbf(data.X, data.X, lengthscale, signal_var) + hyper.gp_jitter * np.eye(len(data.X))
    # Binario: una máquina (clase 1 positiva); K > 2: una por clase
    targets = (1,) if data.n_classes == 2 else tuple(range(data.n_classes))
    grads, sqrt_ws, chols = [], [], []
    for target in targets:
        grad, sqrt_w, chol = _laplace_mode(K, data.y == target, hyper)
        grads.append(grad)
        sqrt_ws.append(sqrt_w)
        chols.append(chol)
    return GpModel(
        kind=ClassifierId.GP,
        X=data.X.copy(),
        lengthscale=lengthscale,
        signal_var=signal_var,
        grads=np.stack(grads),
        sqrt_w=np.stack(sqrt_ws),
        chols=np.stack(chols),
        targets=targets,
        n_classes=data.n_classes,
    )


_FITTERS = {
    ClassifierId.LDA: _fit_lda,
    ClassifierId.QDA: _fit_qda,
    ClassifierId.KNN: _fit_knn,
    ClassifierId.SVM: _fit_svm,
    ClassifierId.GP: _fit_gp,
}


def fit(clf_id, X, y, hyper: Optional[Hyper] = None, n_classes: Optional[int] = None):
    """
    Entrena un clasificador base.

    Args:
        clf_id: ClassifierId o su token ('lda', 'qda', 'knn', 'svm', 'gp')
        X: matriz ensayos x características
        y: etiquetas 0..K-1
        hyper: hiperparámetros (por defecto los de config)
        n_classes: K; por defecto max(y) + 1

    Returns:
        Modelo inmutable listo para predict_scores
    """
    clf_id = ClassifierId.parse(clf_id)
    X = np.asarray(X, dtype=float)
    y = np.asarray(y).astype(int)
    if n_classes is None:
        n_classes = int(y.max()) + 1 if y.size else 0
    data = Dataset(X=X, y=y, n_classes=n_classes)
    data.check_trainable()
    return _FITTERS[clf_id](data, hyper or Hyper())


# --- Predicción ---

def _gaussian_scores(model: GaussianModel, X: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - model.means[None, :, :]
    maha = np.einsum('nkd,kde,nke->nk', diff, model.precisions, diff)
    return softmax(-0.5 * maha + model.log_norms + model.log_priors, axis=1)


def _knn_scores(model: KnnModel, X: np.ndarray) -> np.ndarray:
    dist = cdist(X, model.X)
    k = min(model.k, len(model.X))
    order = np.argsort(dist, axis=1, kind='stable')[:, :k]
    neighbours = model.y[order]
    counts = np.zeros((len(X), model.n_classes))
    rows = np.arange(len(X))
    for j in range(k):
        counts[rows, neighbours[:, j]] += 1.0
    top = counts.max(axis=1, keepdims=True)
    tied = counts == top
    for row in np.flatnonzero(tied.sum(axis=1) > 1):
        # Empate: la masa empatada pasa a la clase empatada con el vecino más cercano
        winner = next(int(c) for c in neighbours[row] if tied[row, c])
        mass = counts[row, tied[row]].sum()
        counts[row, tied[row]] = 0.0
        counts[row, winner] = mass
    return counts / k


def _svm_scores(model: SvmModel, X: np.ndarray) -> np.ndarray:
    Z = (X - model.mean) / model.scale
    decision = Z @ model.weights.T + model.bias
    return expit(-(model.platt_a * decision + model.platt_b))


def _gp_scores(model: GpModel, X: np.ndarray) -> np.ndarray:
    k_star = _rbf(X, model.X, model.lengthscale, model.signal_var)
    probs = []
    for grad, sqrt_w, chol in zip(model.grads, model.sqrt_w, model.chols):
        mean = k_star @ grad
        v = linalg.solve_triangular(chol, sqrt_w[:, None] * k_star.T, lower=True)
        var = np.maximum(model.signal_var - np.sum(v ** 2, axis=0), 0.0)
        probs.append(expit(mean / np.sqrt(1.0 + math.pi * var / 8.0)))
    probs = np.stack(probs, axis=1)
    if model.n_classes == 2:
        return np.concatenate([1.0 - probs, probs], axis=1)
    return probs


_SCORERS = {
    GaussianModel: _gaussian_scores,
    KnnModel: _knn_scores,
    SvmModel: _svm_scores,
    GpModel: _gp_scores,
}


def predict_scores(model, x) -> np.ndarray:
    """
    Puntuaciones por clase: vector (K,) para una muestra o matriz (n, K).

    Cada fila está en [0,1] y suma 1.
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    if single:
        X = X[None]
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionError(
            f"{model.kind.value} model expects {model.n_features} features, got shape {np.shape(x)}"
        )
    scores = _normalise(_SCORERS[type(model)](model, X))
    return scores[0] if single else scores


def predict(model, x) -> np.ndarray:
    return np.argmax(predict_scores(model, x), axis=-1)
