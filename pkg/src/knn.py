"""
K-nächste-Nachbarn mit euklidischem Abstand.

Abstandsgleichstand unter Trainingsdatensätzen: der kleinere Trainingsindex
gewinnt (stabile Sortierung). Stimmengleichstand unter Klassen: je nach
tie_rule die Klasse mit dem nächsten Nachbarn oder der kleinste Klassenindex.
Intern werden quadrierte Abstände verglichen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from dataset import Dataset
from ourpriv_utils import ConfigError, UsageError

NEAREST_OF_TIED = 'nearest-of-tied-classes'
LOWEST_CLASS_INDEX = 'lowest-class-index'
TIE_RULES = (NEAREST_OF_TIED, LOWEST_CLASS_INDEX)
EUCLIDEAN = 'euclidean'


@dataclass(frozen=True)
class KnnConfig:
    k: int = 1
    tie_rule: str = NEAREST_OF_TIED
    distance: str = EUCLIDEAN

    def __post_init__(self):
        if isinstance(self.k, bool) or not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ConfigError(f'k muss eine positive Ganzzahl sein: {self.k!r}')
        object.__setattr__(self, 'k', int(self.k))
        if self.tie_rule not in TIE_RULES:
            raise ConfigError(f'Unbekannte Gleichstandsregel {self.tie_rule!r} '
                              f'(erlaubt: {", ".join(TIE_RULES)})')
        if self.distance != EUCLIDEAN:
            raise ConfigError(f'Nur euklidischer Abstand unterstützt, nicht {self.distance!r}')


def _vektor(werte, name):
    v = np.asarray(werte, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise UsageError(f'{name} muss ein nicht-leerer Vektor sein')
    if not np.all(np.isfinite(v)):
        raise UsageError(f'{name} enthält nicht-endliche Werte')
    return v


def euclidean_distance(x, y):
    # type: (np.ndarray, np.ndarray) -> float
    """sqrt(sum_i (x_i - y_i)^2)."""
    x = _vektor(x, 'x')
    y = _vektor(y, 'y')
    if x.shape != y.shape:
        raise UsageError(f'Dimension {x.size} passt nicht zu {y.size}')
    diff = x - y
    return math.sqrt(float(np.dot(diff, diff)))


def _pruefen(train, config, d):
    if config.k > train.n:
        raise UsageError(f'k={config.k} größer als Trainingsumfang n={train.n}')
    if d != train.d:
        raise UsageError(f'Anfrage hat Dimension {d}, Training {train.d}')


def _abstaende_quadriert(x_train, q):
    diff = x_train - q
    return np.einsum('ij,ij->i', diff, diff)


def _abstimmen(nachbar_codes, klassenanzahl, tie_rule):
    """Klassenindex der Mehrheit unter den (nach Abstand sortierten) Nachbarn."""
    stimmen = np.bincount(nachbar_codes, minlength=klassenanzahl)
    gleichauf = np.flatnonzero(stimmen == stimmen.max())
    if gleichauf.size == 1:
        return int(gleichauf[0])
    if tie_rule == LOWEST_CLASS_INDEX:
        return int(gleichauf[0])
    for code in nachbar_codes:
        if code in gleichauf:
            return int(code)
    raise AssertionError('unerreichbar')


def _klassifizieren(x_train, codes, klassenanzahl, q, config):
    d2 = _abstaende_quadriert(x_train, q)
    reihenfolge = np.argsort(d2, kind='stable')[:config.k]
    return _abstimmen(codes[reihenfolge], klassenanzahl, config.tie_rule)


def classify(train, query, config=None):
    # type: (Dataset, np.ndarray, KnnConfig | None) -> str
    """
    Klasse der Anfrage nach Mehrheit unter den k nächsten Trainingsdatensätzen.

    Raises:
        UsageError: k > n oder Dimension passt nicht.

    """
    config = config or KnnConfig()
    q = _vektor(query, 'query')
    _pruefen(train, config, q.size)
    code = _klassifizieren(train.features, train.label_codes, len(train.class_names), q, config)
    return train.class_names[code]


def classify_batch(train, queries, config=None):
    # type: (Dataset, Dataset | np.ndarray, KnnConfig | None) -> list[str]
    """Element i ist classify(train, queries[i], config)."""
    config = config or KnnConfig()
    x = queries.features if isinstance(queries, Dataset) else np.asarray(queries, dtype=np.float64)
    if x.size == 0:
        return []
    if x.ndim != 2:
        raise UsageError('Anfragen müssen eine Matrix sein')
    if not np.all(np.isfinite(x)):
        raise UsageError('Anfragen enthalten nicht-endliche Werte')
    _pruefen(train, config, x.shape[1])
    klassenanzahl = len(train.class_names)
    return [
        train.class_names[_klassifizieren(train.features, train.label_codes, klassenanzahl, q, config)]
        for q in x
    ]
