"""
Rauschaddition X + e = Z mit reproduzierbarem Gauß-Generator.

Zwei Modi:
- fixed: jede Zelle erhält e ~ N(mean, std^2).
- attribute-scaled: mean und std sind Faktoren; Attribut j erhält
  e ~ N(mean * Mittelwert_j, (std * Standardabweichung_j)^2).

Reihenfolge der Ziehungen: eine Standardnormal-Ziehung je Zelle, zeilenweise
(row-major) aus einem einzigen Generator pro Seed. Die Reihenfolge gehört zur
Reproduzierbarkeit. Werte außerhalb des Wertebereichs (z.B. negative Längen)
werden nicht begrenzt.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd

from dataset import Dataset, attribute_stats
from ourpriv_utils import (
    ConfigError,
    make_rng,
    validate_finite,
    validate_seed,
    yaml_laden,
    yaml_speichern,
)

log = logging.getLogger(__name__)

FIXED = 'fixed'
ATTRIBUTE_SCALED = 'attribute-scaled'
MODES = (FIXED, ATTRIBUTE_SCALED)


@dataclass(frozen=True)
class NoiseParams:
    mode: str = FIXED
    mean: float = 0.0
    std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f'Unbekannter Rauschmodus {self.mode!r} (erlaubt: {", ".join(MODES)})')
        object.__setattr__(self, 'mean', validate_finite(self.mean, 'mean'))
        std = validate_finite(self.std, 'std')
        if std < 0:
            raise ConfigError(f'std muss >= 0 sein, nicht {std}')
        object.__setattr__(self, 'std', std)
        object.__setattr__(self, 'seed', validate_seed(self.seed))

    @classmethod
    def fixed(cls, mean=0.0, std=0.0, seed=0):
        return cls(FIXED, mean, std, seed)

    @classmethod
    def attribute_scaled(cls, mean=1.0, std=1.0, seed=0):
        return cls(ATTRIBUTE_SCALED, mean, std, seed)

    @property
    def is_zero(self) -> bool:
        """True, wenn kein Rauschen addiert wird (Identität)."""
        return self.mean == 0.0 and self.std == 0.0

    def with_std(self, std):
        return replace(self, std=std)

    def with_seed(self, seed):
        return replace(self, seed=seed)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, werte, default_mode=FIXED):
        """Aus einem Mapping mit den Schlüsseln mode, mean, std, seed."""
        if not isinstance(werte, dict):
            raise ConfigError(f'Rauschparameter müssen ein Mapping sein: {werte!r}')
        unbekannt = set(werte) - {'mode', 'mean', 'std', 'seed'}
        if unbekannt:
            raise ConfigError(f'Unbekannte Rauschparameter: {sorted(unbekannt)}')
        mode = werte.get('mode', default_mode)
        standard = cls.attribute_scaled() if mode == ATTRIBUTE_SCALED else cls()
        return cls(
            mode=mode,
            mean=werte.get('mean', standard.mean),
            std=werte.get('std', standard.std),
            seed=werte.get('seed', standard.seed),
        )


def load_noise_params(pfad):
    # type: (str | Path) -> NoiseParams
    return NoiseParams.from_dict(yaml_laden(pfad))


def dump_noise_params(params, pfad):
    # type: (NoiseParams, str | Path) -> None
    yaml_speichern(pfad, params.to_dict())


def sample_gaussian(rng, mean, std, count):
    # type: (np.random.Generator, float, float, int) -> np.ndarray
    """
    count Werte aus N(mean, std^2).

    Verfahren: mean + std * rng.standard_normal(count) (numpy Ziggurat).
    Bei std = 0 wird exakt mean geliefert und der Generator nicht benutzt.

    Raises:
        ConfigError: std < 0 oder count < 1.

    """
    mean = validate_finite(mean, 'mean')
    std = validate_finite(std, 'std')
    if std < 0:
        raise ConfigError(f'std muss >= 0 sein, nicht {std}')
    if isinstance(count, bool) or not isinstance(count, (int, np.integer)) or count < 1:
        raise ConfigError(f'count muss eine positive Ganzzahl sein: {count!r}')
    if std == 0.0:
        return np.full(int(count), mean, dtype=np.float64)
    return mean + std * rng.standard_normal(int(count))


def noise_location_scale(data, params):
    # type: (Dataset, NoiseParams) -> tuple[np.ndarray, np.ndarray]
    """Mittelwert und Standardabweichung des Rauschens je Attribut."""
    d = data.d
    if params.mode == FIXED:
        return np.full(d, params.mean), np.full(d, params.std)
    stats = attribute_stats(data)
    return params.mean * stats.mean, params.std * stats.std


def privatize(data, params):
    # type: (Dataset, NoiseParams) -> Dataset
    """
    Z = X + e, e unabhängig je Zelle.

    Klassen, Attributnamen und Form bleiben erhalten. Bei mean = 0 und
    std = 0 sind die Merkmale bitgleich zur Eingabe.
    """
    if params.is_zero:
        log.debug('Rauschen ist null, Datensatz bleibt unverändert')
        return data.with_features(data.features)

    loc, scale = noise_location_scale(data, params)
    rng = make_rng(params.seed)
    z = sample_gaussian(rng, 0.0, 1.0, data.n * data.d).reshape(data.n, data.d)
    rauschen = loc + scale * z
    log.debug(f'Rauschen {params.mode}: loc={np.round(loc, 4).tolist()} '
              f'scale={np.round(scale, 4).tolist()} seed={params.seed}')
    return data.with_features(data.features + rauschen)


def noise_delta_stats(original, privatized):
    # type: (Dataset, Dataset) -> pd.DataFrame
    """Empirischer Mittelwert/Std (Divisor n) von Z - X je Attribut und gesamt."""
    if original.features.shape != privatized.features.shape:
        raise ConfigError('Datensätze haben unterschiedliche Form')
    delta = privatized.features - original.features
    index = list(original.attribute_names) + ['gesamt']
    return pd.DataFrame(
        {
            'mean': np.append(delta.mean(axis=0), delta.mean()),
            'std': np.append(delta.std(axis=0), delta.std()),
        },
        index=pd.Index(index, name='attribute'),
    )
