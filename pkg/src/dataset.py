"""
Datensätze laden, prüfen und beschreiben; reproduzierbare Faltungen erzeugen.

Ein Datensatz ist eine n x d Merkmalsmatrix (float64, nur lesbar) mit genau
einer Klassenbezeichnung je Zeile. Klassen werden in der Reihenfolge ihres
ersten Auftretens nummeriert; diese Nummer ist der "Klassenindex" der
KNN-Regel lowest-class-index.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, TextIO

import numpy as np
import pandas as pd

from ourpriv_utils import (
    ConfigError,
    EmptyInputError,
    ParseError,
    make_rng,
    validate_fold_count,
)

log = logging.getLogger(__name__)

# ----------------- Schema -----------------

@dataclass(frozen=True)
class CsvSchema:
    """Spaltenrollen einer Eingabedatei. Standard: UCI-Iris (Klasse zuletzt)."""
    label_column: int = -1
    feature_columns: tuple[int, ...] | None = None
    header: bool = False
    delimiter: str = ','

    def __post_init__(self):
        if len(self.delimiter) != 1:
            raise ConfigError(f'Trennzeichen muss genau ein Zeichen sein: {self.delimiter!r}')
        if self.feature_columns is not None:
            object.__setattr__(self, 'feature_columns', tuple(int(c) for c in self.feature_columns))
            if not self.feature_columns:
                raise ConfigError('Mindestens eine Merkmalsspalte erforderlich')

    def resolve(self, spalten):
        # type: (int) -> tuple[int, tuple[int, ...]]
        """Absolute Label- und Merkmalsspalten für eine Datei mit `spalten` Spalten."""
        label = self.label_column + spalten if self.label_column < 0 else self.label_column
        if not 0 <= label < spalten:
            raise ConfigError(f'Klassenspalte {self.label_column} existiert nicht '
                              f'({spalten} Spalten)')
        if self.feature_columns is None:
            merkmale = tuple(c for c in range(spalten) if c != label)
        else:
            merkmale = tuple(c + spalten if c < 0 else c for c in self.feature_columns)
            for c in merkmale:
                if not 0 <= c < spalten:
                    raise ConfigError(f'Merkmalsspalte {c} existiert nicht ({spalten} Spalten)')
            if label in merkmale:
                raise ConfigError(f'Spalte {label} ist zugleich Merkmal und Klasse')
            if len(set(merkmale)) != len(merkmale):
                raise ConfigError('Merkmalsspalten doppelt angegeben')
        if not merkmale:
            raise ConfigError('Mindestens eine Merkmalsspalte erforderlich')
        return label, merkmale


# ----------------- Datentypen -----------------

@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    attribute_names: tuple[str, ...]
    class_names: tuple[str, ...]
    label_codes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = np.array(self.features, dtype=np.float64, copy=True)
        if x.ndim != 2:
            raise ConfigError(f'Merkmalsmatrix muss 2-dimensional sein, nicht {x.ndim}')
        n, d = x.shape
        if n < 1 or d < 1:
            raise ConfigError(f'Datensatz braucht n >= 1 und d >= 1 (n={n}, d={d})')
        if not np.all(np.isfinite(x)):
            raise ConfigError('Merkmalswerte müssen endlich sein (kein NaN/inf)')
        y = np.array([str(v) for v in self.labels], dtype=object)
        if y.shape != (n,):
            raise ConfigError(f'{len(y)} Klassen für {n} Datensätze')
        namen = tuple(str(a) for a in self.attribute_names)
        if len(namen) != d:
            raise ConfigError(f'{len(namen)} Attributnamen für {d} Attribute')
        klassen = tuple(str(c) for c in self.class_names)
        if len(set(klassen)) != len(klassen):
            raise ConfigError('Klassennamen müssen eindeutig sein')
        index = {c: i for i, c in enumerate(klassen)}
        fehlend = sorted(set(y) - index.keys())
        if fehlend:
            raise ConfigError(f'Klassen fehlen in class_names: {fehlend}')
        codes = np.fromiter((index[v] for v in y), dtype=np.intp, count=n)
        x.setflags(write=False)
        y.setflags(write=False)
        codes.setflags(write=False)
        object.__setattr__(self, 'features', x)
        object.__setattr__(self, 'labels', y)
        object.__setattr__(self, 'attribute_names', namen)
        object.__setattr__(self, 'class_names', klassen)
        object.__setattr__(self, 'label_codes', codes)

    @classmethod
    def from_arrays(cls, features, labels, attribute_names=None, class_names=None):
        """Bequemer Konstruktor; Namen werden bei Bedarf erzeugt."""
        x = np.asarray(features, dtype=np.float64)
        if attribute_names is None:
            attribute_names = [f'attr_{j}' for j in range(x.shape[1] if x.ndim == 2 else 0)]
        if class_names is None:
            class_names = list(dict.fromkeys(str(v) for v in labels))
        return cls(x, labels, tuple(attribute_names), tuple(class_names))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def with_features(self, features):
        """Gleiche Klassen und Namen, neue Merkmalsmatrix gleicher Form."""
        features = np.asarray(features, dtype=np.float64)
        if features.shape != self.features.shape:
            raise ConfigError(f'Form {features.shape} passt nicht zu {self.features.shape}')
        return Dataset(features, self.labels, self.attribute_names, self.class_names)

    def subset(self, indices):
        """Zeilenauswahl; Klassennamen bleiben vollständig erhalten."""
        indices = np.asarray(indices, dtype=np.intp)
        return Dataset(self.features[indices], self.labels[indices],
                       self.attribute_names, self.class_names)

    def class_counts(self):
        # type: () -> dict[str, int]
        counts = np.bincount(self.label_codes, minlength=len(self.class_names))
        return {c: int(k) for c, k in zip(self.class_names, counts)}


@dataclass(frozen=True, eq=False)
class AttributeStats:
    mean: np.ndarray
    std: np.ndarray
    ddof: int = 0


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    fold_count: int
    fold_index: np.ndarray

    def test_indices(self, fold):
        return np.flatnonzero(self.fold_index == fold)

    def train_indices(self, fold):
        return np.flatnonzero(self.fold_index != fold)

    def sizes(self):
        return np.bincount(self.fold_index, minlength=self.fold_count)


# ----------------- Einlesen / Schreiben -----------------

def _leerzeile(zeile):
    return all(not z.strip() for z in zeile)


def load_csv(source, schema=None):
    # type: (BinaryIO | TextIO, CsvSchema | None) -> Dataset
    """
    Liest einen trennzeichen-separierten Datensatz.

    Args:
        source: Byte-Stream (UTF-8, BOM erlaubt) oder Text-Stream.
        schema (CsvSchema): Spaltenrollen; Standard ist das Iris-Layout.

    Returns:
        Dataset: Zeilenreihenfolge wie in der Quelle.

    Raises:
        EmptyInputError: Keine Datenzeile vorhanden.
        ParseError: Falsche Spaltenanzahl oder nicht-numerische Merkmalszelle,
            jeweils mit Zeilennummer.

    """
    schema = schema or CsvSchema()
    if isinstance(source, io.TextIOBase):
        text = source
    else:
        text = io.TextIOWrapper(source, encoding='utf-8-sig', newline='')
    reader = csv.reader(text, delimiter=schema.delimiter)

    kopf = None
    spalten = None
    label_spalte = merkmal_spalten = None
    zeilen = []
    klassen = []
    try:
        for zeile in reader:
            if _leerzeile(zeile):
                continue
            nr = reader.line_num
            if spalten is None:
                spalten = len(zeile)
                try:
                    label_spalte, merkmal_spalten = schema.resolve(spalten)
                except ConfigError as e:
                    raise ParseError(str(e), nr) from None
                if schema.header:
                    kopf = [z.strip() for z in zeile]
                    continue
            if len(zeile) != spalten:
                raise ParseError(f'{len(zeile)} Spalten statt {spalten}', nr)
            werte = []
            for c in merkmal_spalten:
                zelle = zeile[c].strip()
                try:
                    wert = float(zelle)
                except ValueError:
                    raise ParseError(f'Spalte {c + 1}: {zelle!r} ist keine Zahl', nr) from None
                if not np.isfinite(wert):
                    raise ParseError(f'Spalte {c + 1}: {zelle!r} ist nicht endlich', nr)
                werte.append(wert)
            klasse = zeile[label_spalte].strip()
            if not klasse:
                raise ParseError(f'Spalte {label_spalte + 1}: leere Klasse', nr)
            zeilen.append(werte)
            klassen.append(klasse)
    except csv.Error as e:
        raise ParseError(str(e), reader.line_num) from None

    if not zeilen:
        raise EmptyInputError('Eingabe enthält keine Datensätze')

    if kopf is not None:
        namen = tuple(kopf[c] for c in merkmal_spalten)
    else:
        namen = tuple(f'attr_{j}' for j in range(len(merkmal_spalten)))
    data = Dataset(np.array(zeilen, dtype=np.float64), klassen, namen,
                   tuple(dict.fromkeys(klassen)))
    log.debug(f'{data.n} Datensätze, {data.d} Attribute, {len(data.class_names)} Klassen gelesen')
    return data


def load_csv_file(pfad, schema=None):
    # type: (str | Path, CsvSchema | None) -> Dataset
    with open(pfad, 'rb') as f:
        return load_csv(f, schema)


def to_frame(data, schema=None):
    # type: (Dataset, CsvSchema | None) -> pd.DataFrame
    """DataFrame mit Merkmalen und Klasse an der Position des Schemas."""
    schema = schema or CsvSchema()
    df = pd.DataFrame(data.features, columns=list(data.attribute_names))
    spalten = data.d + 1
    pos = schema.label_column + spalten if schema.label_column < 0 else schema.label_column
    pos = min(max(pos, 0), data.d)
    df.insert(pos, 'class', list(data.labels), allow_duplicates=True)
    return df


def dump_csv(data, sink, schema=None):
    # type: (Dataset, TextIO, CsvSchema | None) -> None
    """
    Schreibt den Datensatz im Eingabeformat zurück.

    Gleitkommazahlen werden mit kürzester exakter Darstellung geschrieben,
    ein erneutes Einlesen liefert bitgleiche Merkmale.
    """
    schema = schema or CsvSchema()
    to_frame(data, schema).to_csv(
        sink, sep=schema.delimiter, header=schema.header, index=False, lineterminator='\n'
    )


def dump_csv_file(data, pfad, schema=None):
    # type: (Dataset, str | Path, CsvSchema | None) -> None
    with open(pfad, 'w', encoding='utf-8', newline='') as f:
        dump_csv(data, f, schema)


# ----------------- Statistik -----------------

def attribute_stats(data, ddof=0):
    # type: (Dataset, int) -> AttributeStats
    """
    Mittelwert und Standardabweichung je Attribut.

    ddof=0 ist die Populationskonvention (Divisor n), ddof=1 die
    Stichprobenkonvention (Divisor n-1). Konstante Attribute liefern exakt 0.
    """
    if ddof not in (0, 1):
        raise ConfigError(f'ddof muss 0 oder 1 sein, nicht {ddof}')
    if ddof == 1 and data.n < 2:
        raise ConfigError('Stichproben-Standardabweichung braucht n >= 2')
    x = data.features
    mean = x.mean(axis=0)
    std = x.std(axis=0, ddof=ddof)
    konstant = np.ptp(x, axis=0) == 0
    mean[konstant] = x[0, konstant]
    std[konstant] = 0.0
    mean.setflags(write=False)
    std.setflags(write=False)
    return AttributeStats(mean, std, ddof)


def stats_table(data, stats=None):
    # type: (Dataset, AttributeStats | None) -> pd.DataFrame
    """Attributstatistik als Tabelle (Index = Attributname)."""
    stats = stats or attribute_stats(data)
    return pd.DataFrame({'mean': stats.mean, 'std': stats.std},
                        index=pd.Index(data.attribute_names, name='attribute'))


def summary_items(data, stats=None):
    # type: (Dataset, AttributeStats | None) -> list[tuple[str, object]]
    """Schlüssel-Wert-Paare: Umfang, Klassenverteilung, Attributstatistik."""
    stats = stats or attribute_stats(data)
    items = [('n', data.n), ('d', data.d), ('classes', len(data.class_names))]
    items += [(f'class.{c}.count', k) for c, k in data.class_counts().items()]
    for j, name in enumerate(data.attribute_names):
        items.append((f'attribute.{name}.mean', float(stats.mean[j])))
        items.append((f'attribute.{name}.std', float(stats.std[j])))
    items.append(('std.ddof', stats.ddof))
    return items


# ----------------- Faltungen -----------------

def split_folds(data, fold_count, seed, stratified=True):
    # type: (Dataset, int, int, bool) -> FoldAssignment
    """
    Reproduzierbare Zuordnung der Datensätze zu Faltungen.

    Die Indizes werden mit dem Seed gemischt und reihum auf die Faltungen
    verteilt. Stratifiziert wird je Klasse (in Klassenindex-Reihenfolge)
    gemischt und verteilt, wobei die Verteilung dort weiterläuft, wo die
    vorige Klasse aufgehört hat; so bleiben auch die Gesamtgrößen der
    Faltungen um höchstens 1 verschieden.

    Raises:
        ConfigError: fold_count < 2, fold_count > n oder (stratifiziert)
            fold_count größer als die kleinste Klasse.

    """
    counts = np.bincount(data.label_codes, minlength=len(data.class_names))
    kleinste = int(counts[counts > 0].min()) if stratified else None
    validate_fold_count(fold_count, data.n, kleinste)
    rng = make_rng(seed)

    faltung = np.empty(data.n, dtype=np.intp)
    if stratified:
        pos = 0
        for c in range(len(data.class_names)):
            mitglieder = np.flatnonzero(data.label_codes == c)
            if mitglieder.size == 0:
                continue
            gemischt = rng.permutation(mitglieder)
            faltung[gemischt] = (pos + np.arange(gemischt.size)) % fold_count
            pos += gemischt.size
    else:
        gemischt = rng.permutation(data.n)
        faltung[gemischt] = np.arange(data.n) % fold_count

    faltung.setflags(write=False)
    return FoldAssignment(int(fold_count), faltung)
