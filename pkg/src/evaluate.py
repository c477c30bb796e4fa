"""
Klassifikationsfehler mit k-facher Kreuzvalidierung bestimmen.

Ablauf: erst privatisieren (einmal, vor der Aufteilung),
dann falten und klassifizieren. Trainings- und Testteil stammen beide aus dem
privatisierten Datensatz; test_on_original=True testet stattdessen gegen die
Originaldatensätze (Sensitivitätsanalyse).
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from dataset import Dataset, FoldAssignment, split_folds
from knn import KnnConfig, classify_batch
from noise import FIXED, NoiseParams, privatize
from ourpriv_utils import ConfigError, UsageError

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CvResult:
    fold_assignment: FoldAssignment
    predictions: np.ndarray
    truths: np.ndarray
    class_names: tuple[str, ...]
    overall_error: float
    per_fold_error: tuple[float, ...]
    confusion_matrix: np.ndarray

    @property
    def n(self) -> int:
        return len(self.truths)

    @property
    def misclassified(self) -> int:
        return int(np.count_nonzero(self.predictions != self.truths))

    def error_from_confusion(self):
        # type: () -> float
        cm = self.confusion_matrix
        return (int(cm.sum()) - int(np.trace(cm))) / int(cm.sum())

    def confusion_frame(self):
        # type: () -> pd.DataFrame
        """Konfusionsmatrix mit Klassennamen (Zeilen: actual, Spalten: predicted)."""
        return pd.DataFrame(
            self.confusion_matrix,
            index=pd.Index(self.class_names, name='actual'),
            columns=pd.Index(self.class_names, name='predicted'),
        )


def classification_error(predictions, truths):
    # type: (list, list) -> float
    """
    Anteil der Positionen mit Vorhersage != Wahrheit.

    Raises:
        UsageError: Leere Listen oder unterschiedliche Längen.

    """
    p = np.asarray(list(predictions), dtype=object)
    t = np.asarray(list(truths), dtype=object)
    if p.size == 0 or t.size == 0:
        raise UsageError('Vorhersagen und Wahrheiten dürfen nicht leer sein')
    if p.size != t.size:
        raise UsageError(f'{p.size} Vorhersagen für {t.size} Wahrheiten')
    return int(np.count_nonzero(p != t)) / int(t.size)


def confusion_matrix(predictions, truths, class_names):
    # type: (np.ndarray, np.ndarray, tuple[str, ...]) -> np.ndarray
    """Zählmatrix Klasse x Klasse, Zeile = wahre Klasse, Spalte = Vorhersage."""
    index = {c: i for i, c in enumerate(class_names)}
    cm = np.zeros((len(class_names), len(class_names)), dtype=np.int64)
    for p, t in zip(predictions, truths):
        cm[index[t], index[p]] += 1
    return cm


def _kreuzvalidieren(train_data, test_data, config, fold_count, seed, stratified):
    faltungen = split_folds(train_data, fold_count, seed, stratified)
    groessen = faltungen.sizes()
    kleinstes_training = train_data.n - int(groessen.max())
    if config.k > kleinstes_training:
        raise UsageError(f'k={config.k} größer als kleinster Trainingsteil ({kleinstes_training})')

    vorhersagen = np.empty(train_data.n, dtype=object)
    for f in range(fold_count):
        test_idx = faltungen.test_indices(f)
        training = train_data.subset(faltungen.train_indices(f))
        vorhersagen[test_idx] = classify_batch(training, test_data.features[test_idx], config)

    wahr = np.asarray(train_data.labels, dtype=object)
    falsch = vorhersagen != wahr
    je_faltung = tuple(
        int(np.count_nonzero(falsch[faltungen.fold_index == f])) / int(groessen[f])
        for f in range(fold_count)
    )
    gesamt = classification_error(vorhersagen, wahr)
    log.debug(f'Kreuzvalidierung seed={seed}: Fehler {gesamt:.4f} '
              f'({int(np.count_nonzero(falsch))}/{train_data.n})')
    vorhersagen.setflags(write=False)
    return CvResult(
        fold_assignment=faltungen,
        predictions=vorhersagen,
        truths=wahr,
        class_names=train_data.class_names,
        overall_error=gesamt,
        per_fold_error=je_faltung,
        confusion_matrix=confusion_matrix(vorhersagen, wahr, train_data.class_names),
    )


def cross_validate(data, config=None, fold_count=10, seed=0, stratified=True):
    # type: (Dataset, KnnConfig | None, int, int, bool) -> CvResult
    """
    Jede Faltung wird gegen die Vereinigung aller anderen klassifiziert.

    Vorhersagen stehen in Original-Reihenfolge; bei gleichen Argumenten ist
    das Ergebnis bitgleich.
    """
    return _kreuzvalidieren(data, data, config or KnnConfig(), fold_count, seed, stratified)


def pipeline_evaluate(data, noise, config=None, fold_count=10, seed=0,
                      stratified=True, test_on_original=False):
    # type: (Dataset, NoiseParams, KnnConfig | None, int, int, bool, bool) -> CvResult
    """cross_validate(privatize(data, noise), ...); Rauschen einmal vor der Aufteilung."""
    config = config or KnnConfig()
    privat = privatize(data, noise)
    testdaten = data if test_on_original else privat
    return _kreuzvalidieren(privat, testdaten, config, fold_count, seed, stratified)


# ----------------- Mehrfachläufe -----------------

@dataclass(frozen=True, eq=False)
class SeedSummary:
    seeds: tuple[int, ...]
    results: tuple[CvResult, ...]

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.overall_error for r in self.results])

    @property
    def mean_error(self) -> float:
        return float(self.errors.mean())

    @property
    def min_error(self) -> float:
        return float(self.errors.min())

    @property
    def max_error(self) -> float:
        return float(self.errors.max())


def evaluate_seeds(data, seeds, config=None, fold_count=10, noise=None,
                   stratified=True, test_on_original=False, noise_seed_follows=True):
    # type: (Dataset, list[int], KnnConfig | None, int, NoiseParams | None, bool, bool, bool) -> SeedSummary
    """
    Ein Lauf je Seed. Der Seed steuert die Faltungen und, wenn
    noise_seed_follows gesetzt ist, auch das Rauschen.
    """
    seeds = tuple(seeds)
    if not seeds:
        raise ConfigError('Seed-Liste darf nicht leer sein')
    results = []
    for s in seeds:
        if noise is None:
            results.append(cross_validate(data, config, fold_count, s, stratified))
        else:
            params = noise.with_seed(s) if noise_seed_follows else noise
            results.append(pipeline_evaluate(data, params, config, fold_count, s,
                                             stratified, test_on_original))
    return SeedSummary(seeds, tuple(results))


def sweep(data, stds, seeds, config=None, fold_count=10, mode=FIXED, mean=0.0,
          stratified=True, jobs=1):
    # type: (Dataset, list[float], list[int], KnnConfig | None, int, str, float, bool, int) -> pd.DataFrame
    """
    Raster std x Seeds; je Zelle ein pipeline_evaluate mit Seed für Rauschen
    und Faltungen. Zeilen in Rasterreihenfolge, auch bei jobs > 1.
    """
    if not stds or not seeds:
        raise ConfigError('Sweep braucht mindestens einen std-Wert und einen Seed')
    if jobs < 1:
        raise ConfigError(f'jobs muss >= 1 sein, nicht {jobs}')
    config = config or KnnConfig()
    zellen = [NoiseParams(mode, mean, s, seed) for s in stds for seed in seeds]

    def auswerten(params):
        r = pipeline_evaluate(data, params, config, fold_count, params.seed, stratified)
        log.debug(f'Sweep std={params.std} seed={params.seed}: {r.overall_error:.4f}')
        return r.overall_error

    if jobs == 1:
        fehler = [auswerten(p) for p in zellen]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            fehler = list(pool.map(auswerten, zellen))

    return pd.DataFrame({
        'mode': [p.mode for p in zellen],
        'mean': [p.mean for p in zellen],
        'std': [p.std for p in zellen],
        'seed': [p.seed for p in zellen],
        'error': fehler,
    })


def sweep_summary(cells):
    # type: (pd.DataFrame) -> pd.DataFrame
    """Mittel, Minimum und Maximum des Fehlers je std (Rasterreihenfolge)."""
    gruppen = cells.groupby('std', sort=False)['error']
    return pd.DataFrame({
        'mean_error': gruppen.mean(),
        'min_error': gruppen.min(),
        'max_error': gruppen.max(),
        'runs': gruppen.size(),
    }).reset_index()
