"""
Regelschleife: privatisieren, klassifizieren, Fehler mit Schwellwert
vergleichen, Rauschparameter anpassen, wiederholen.

Die Schleife stoppt beim ersten Schritt mit Fehler <= Schwellwert, nach
max_iterations Schritten oder am Ende des Schedules. Jeder Schritt wird mit
den tatsächlich verwendeten Parametern (inkl. Seed) protokolliert, damit er
einzeln nachgerechnet werden kann.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from dataset import Dataset
from evaluate import pipeline_evaluate
from knn import KnnConfig
from noise import NoiseParams
from ourpriv_utils import ConfigError, validate_finite, validate_fold_count, validate_seed, yaml_laden

log = logging.getLogger(__name__)

MET_THRESHOLD = 'met-threshold'
BUDGET_EXHAUSTED = 'budget-exhausted'

SEED_FIXED = 'fixed'
SEED_FRESH = 'fresh'
SEED_POLICIES = (SEED_FIXED, SEED_FRESH)

# ----------------- Schedules -----------------

@dataclass(frozen=True)
class MultiplicativeSchedule:
    """std wird je Schritt mit gamma multipliziert, mean bleibt konstant."""
    gamma: float = 0.5

    def __post_init__(self):
        gamma = validate_finite(self.gamma, 'gamma')
        if not 0.0 < gamma < 1.0:
            raise ConfigError(f'gamma muss in (0, 1) liegen, nicht {gamma}')
        object.__setattr__(self, 'gamma', gamma)

    def params(self, initial):
        # type: (NoiseParams) -> Iterator[NoiseParams]
        """Endet, sobald std nicht mehr kleiner wird (Unterlauf auf 0)."""
        aktuell = initial
        while True:
            yield aktuell
            naechste = aktuell.std * self.gamma
            if not naechste < aktuell.std:
                return
            aktuell = aktuell.with_std(naechste)

    def to_dict(self):
        return {'type': 'multiplicative', 'gamma': self.gamma}


@dataclass(frozen=True)
class ExplicitSchedule:
    """Feste Parameterliste, Schritt für Schritt abgearbeitet."""
    steps: tuple[NoiseParams, ...]

    def __post_init__(self):
        object.__setattr__(self, 'steps', tuple(self.steps))
        if not self.steps:
            raise ConfigError('Explizite Parameterliste darf nicht leer sein')

    def params(self, initial):
        # type: (NoiseParams) -> Iterator[NoiseParams]
        yield from self.steps

    def to_dict(self):
        return {'type': 'explicit', 'steps': [p.to_dict() for p in self.steps]}


# ----------------- Konfiguration -----------------

@dataclass(frozen=True)
class TuneConfig:
    threshold: float
    initial: NoiseParams
    schedule: MultiplicativeSchedule | ExplicitSchedule = field(default_factory=MultiplicativeSchedule)
    max_iterations: int = 10
    knn: KnnConfig = field(default_factory=KnnConfig)
    fold_count: int = 10
    seed: int = 0
    seed_policy: str = SEED_FIXED
    stratified: bool = True

    def __post_init__(self):
        tau = validate_finite(self.threshold, 'threshold')
        if not 0.0 <= tau <= 1.0:
            raise ConfigError(f'Schwellwert muss in [0, 1] liegen, nicht {tau}')
        object.__setattr__(self, 'threshold', tau)
        if (isinstance(self.max_iterations, bool) or not isinstance(self.max_iterations, (int, np.integer))
                or self.max_iterations < 1):
            raise ConfigError(f'max_iterations muss >= 1 sein, nicht {self.max_iterations!r}')
        if self.seed_policy not in SEED_POLICIES:
            raise ConfigError(f'Unbekannte Seed-Strategie {self.seed_policy!r} '
                              f'(erlaubt: {", ".join(SEED_POLICIES)})')
        object.__setattr__(self, 'seed', validate_seed(self.seed))
        if (isinstance(self.fold_count, bool) or not isinstance(self.fold_count, (int, np.integer))
                or self.fold_count < 2):
            raise ConfigError(f'fold_count muss eine Ganzzahl >= 2 sein, nicht {self.fold_count!r}')
        if isinstance(self.schedule, MultiplicativeSchedule) and not self.initial.std > 0:
            raise ConfigError('Multiplikativer Schedule braucht eine Start-std > 0')

    def seed_for(self, schritt):
        # type: (int) -> int
        """Seed für Rauschen und Faltungen im Schritt (0-basiert)."""
        return self.seed if self.seed_policy == SEED_FIXED else self.seed + schritt

    def to_dict(self):
        return {
            'threshold': self.threshold,
            'max_iterations': self.max_iterations,
            'fold_count': self.fold_count,
            'seed': self.seed,
            'seed_policy': self.seed_policy,
            'stratified': self.stratified,
            'knn': {'k': self.knn.k, 'tie_rule': self.knn.tie_rule},
            'initial': self.initial.to_dict(),
            'schedule': self.schedule.to_dict(),
        }

    @classmethod
    def from_dict(cls, werte):
        """Aus einem YAML-Mapping (siehe README für das Format)."""
        if not isinstance(werte, dict):
            raise ConfigError('Tuner-Konfiguration muss ein Mapping sein')
        bekannt = {'threshold', 'initial', 'schedule', 'max_iterations', 'knn',
                   'fold_count', 'seed', 'seed_policy', 'stratified'}
        unbekannt = set(werte) - bekannt
        if unbekannt:
            raise ConfigError(f'Unbekannte Tuner-Schlüssel: {sorted(unbekannt)}')
        if 'threshold' not in werte:
            raise ConfigError('threshold fehlt')

        plan = dict(werte.get('schedule') or {'type': 'multiplicative'})
        art = plan.pop('type', 'multiplicative')
        if art == 'multiplicative':
            try:
                schedule = MultiplicativeSchedule(**plan)
            except TypeError as e:
                raise ConfigError(f'schedule: {e}') from None
        elif art == 'explicit':
            schedule = ExplicitSchedule(tuple(NoiseParams.from_dict(s) for s in plan.get('steps') or []))
        else:
            raise ConfigError(f'Unbekannter Schedule-Typ {art!r}')

        if 'initial' in werte:
            initial = NoiseParams.from_dict(werte['initial'])
        elif isinstance(schedule, ExplicitSchedule):
            initial = schedule.steps[0]
        else:
            raise ConfigError('initial fehlt (Pflicht beim multiplikativen Schedule)')

        knn = werte.get('knn') or {}
        try:
            knn_config = KnnConfig(**knn)
        except TypeError as e:
            raise ConfigError(f'knn: {e}') from None
        return cls(
            threshold=werte['threshold'],
            initial=initial,
            schedule=schedule,
            max_iterations=werte.get('max_iterations', 10),
            knn=knn_config,
            fold_count=werte.get('fold_count', 10),
            seed=werte.get('seed', 0),
            seed_policy=werte.get('seed_policy', SEED_FIXED),
            stratified=bool(werte.get('stratified', True)),
        )


def load_tune_config(pfad):
    # type: (str | Path) -> TuneConfig
    return TuneConfig.from_dict(yaml_laden(pfad))


# ----------------- Protokoll -----------------

@dataclass(frozen=True)
class TuneStep:
    index: int
    params: NoiseParams
    fold_seed: int
    error: float
    decision: str


@dataclass(frozen=True)
class TuneTrace:
    config: TuneConfig
    steps: tuple[TuneStep, ...]
    outcome: str
    accepted: NoiseParams | None = None


def tune(data, tcfg):
    # type: (Dataset, TuneConfig) -> TuneTrace
    """
    Schwellwert-Schleife über den Schedule.

    Raises:
        ConfigError: Faltungsanzahl passt nicht zum Datensatz (vor jeder
            Auswertung).

    """
    counts = np.bincount(data.label_codes, minlength=len(data.class_names))
    validate_fold_count(tcfg.fold_count, data.n,
                        int(counts[counts > 0].min()) if tcfg.stratified else None)

    schritte = []
    plan = tcfg.schedule.params(tcfg.initial)
    for i, params in zip(range(tcfg.max_iterations), plan):
        seed = tcfg.seed_for(i)
        params = params.with_seed(seed)
        ergebnis = pipeline_evaluate(data, params, tcfg.knn, tcfg.fold_count, seed, tcfg.stratified)
        fehler = ergebnis.overall_error
        erreicht = fehler <= tcfg.threshold
        schritte.append(TuneStep(i + 1, params, seed, fehler, MET_THRESHOLD if erreicht else 'adjust'))
        log.info(f'Schritt {i + 1}: {params.mode} mean={params.mean:g} std={params.std:g} '
                 f'-> Fehler {fehler:.4f} ({"akzeptiert" if erreicht else "anpassen"})')
        if erreicht:
            return TuneTrace(tcfg, tuple(schritte), MET_THRESHOLD, params)

    log.info(f'Budget erschöpft nach {len(schritte)} Schritten')
    return TuneTrace(tcfg, tuple(schritte), BUDGET_EXHAUSTED, None)
