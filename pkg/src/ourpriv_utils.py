"""
    Hilfsfunktionen für alle OurPriv-Module: Fehlerklassen, Prüfungen,
    Logging-Einrichtung, Zufallsgeneratoren und YAML-Konfigurationsdateien.
"""
from __future__ import annotations

import logging
import math
import sys
from pathlib import Path
from typing import Any

import numpy as np
import yaml

LOG_FORMAT = '[%(asctime)s] %(levelname)s %(name)s: %(message)s'
LOG_DATEFMT = '%H:%M:%S'


# ----------------- Fehlerklassen -----------------

class OurPrivError(Exception):
    """Basisklasse aller OurPriv-Fehler."""


class ConfigError(OurPrivError, ValueError):
    """Ungültige Parameter (Faltungen, Rauschen, Schwellwert, Schedule ...)."""


class UsageError(OurPrivError, ValueError):
    """Falsche Verwendung einer Operation (Dimension, k > n, Längen ...)."""


class ParseError(OurPrivError, ValueError):
    """Fehlerhafte Eingabedatei; ``line`` ist 1-basiert oder None."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f'Zeile {line}: {message}'
        super().__init__(message)


class EmptyInputError(ParseError):
    """Eingabe ohne einen einzigen Datensatz."""


class ReportError(OurPrivError):
    """Bericht oder Plotdaten fehlen oder sind leer."""


# ----------------- Prüfungen -----------------

def validate_fold_count(fold_count, n, smallest_class=None):
    # type: (int, int, int | None) -> None
    """
    Prüft die Anzahl der Faltungen gegen die Anzahl der Datensätze.

    Args:
        fold_count (int): Gewünschte Anzahl der Faltungen.
        n (int): Anzahl der Datensätze.
        smallest_class (int): Größe der kleinsten Klasse, nur bei
            stratifizierter Aufteilung.

    Raises:
        ConfigError: Wenn fold_count nicht in [2, n] liegt oder die kleinste
        Klasse zu klein ist.

    """
    if isinstance(fold_count, bool) or not isinstance(fold_count, (int, np.integer)):
        raise ConfigError(f'Anzahl der Faltungen muss ganzzahlig sein: {fold_count!r}')
    if fold_count < 2 or fold_count > n:
        raise ConfigError(f'Anzahl der Faltungen muss zwischen 2 und {n} liegen, '
                          f'nicht {fold_count}')
    if smallest_class is not None and fold_count > smallest_class:
        raise ConfigError(f'Stratifizierung: {fold_count} Faltungen, aber die '
                          f'kleinste Klasse hat nur {smallest_class} Datensätze')


def validate_seed(seed):
    # type: (int) -> int
    """Seeds sind vorzeichenlose Ganzzahlen."""
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ConfigError(f'Seed muss eine nicht-negative Ganzzahl sein: {seed!r}')
    return int(seed)


def validate_finite(value, name):
    # type: (float, str) -> float
    """Gibt value als float zurück oder wirft ConfigError bei NaN/inf."""
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f'{name} muss eine Zahl sein: {value!r}') from None
    if not math.isfinite(value):
        raise ConfigError(f'{name} muss endlich sein: {value!r}')
    return value


def parse_float_list(text, name):
    # type: (str, str) -> list[float]
    """Kommagetrennte Zahlenliste, z.B. '0,0.05,0.1'."""
    teile = [t.strip() for t in text.split(',') if t.strip()]
    if not teile:
        raise ConfigError(f'{name}: leere Liste')
    return [validate_finite(t, name) for t in teile]


def parse_seed_list(text):
    # type: (str) -> list[int]
    """
    Seed-Liste aus '1,2,3' oder Bereich '0-19' (beide Enden inklusive).

    Raises:
        ConfigError: Leere Liste oder ungültiger Eintrag.

    """
    seeds = []
    for teil in (t.strip() for t in text.split(',')):
        if not teil:
            continue
        try:
            if '-' in teil:
                start, ende = (int(x) for x in teil.split('-', 1))
                if ende < start:
                    raise ValueError
                seeds.extend(range(start, ende + 1))
            else:
                seeds.append(int(teil))
        except ValueError:
            raise ConfigError(f'Ungültiger Seed-Eintrag: {teil!r}') from None
    if not seeds:
        raise ConfigError('Seed-Liste darf nicht leer sein')
    return [validate_seed(s) for s in seeds]


# ----------------- Zufall -----------------

def make_rng(seed):
    # type: (int) -> np.random.Generator
    """
    Erzeugt den einzigen Zufallsgenerator-Typ des Projekts.

    PCG64 mit numpy-Normalverteilung (Ziggurat); gleicher Seed ergibt auf
    Plattformen mit gleichem Gleitkommaformat dieselben Werte.

    Args:
        seed (int): Nicht-negativer Seed.

    Returns:
        np.random.Generator: Neuer, unabhängiger Generator.

    """
    return np.random.default_rng(validate_seed(seed))


# ----------------- Logging -----------------

def logging_einrichten(debug=False):
    # type: (bool) -> None
    """Konsolen-Logging auf stderr einrichten (einmalig pro Prozess)."""
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.INFO,
        format=LOG_FORMAT,
        datefmt=LOG_DATEFMT,
        stream=sys.stderr,
        force=True,
    )
    # matplotlib Logging unterdrücken
    logging.getLogger('matplotlib').setLevel(logging.WARNING)


# ----------------- YAML-Konfiguration -----------------

def yaml_laden(pfad):
    # type: (str | Path) -> dict[str, Any]
    """
    Liest eine YAML-Konfigurationsdatei als dict.

    Raises:
        OSError: Datei nicht lesbar.
        ParseError: Kein gültiges YAML oder kein Mapping auf oberster Ebene.

    """
    text = Path(pfad).read_text(encoding='utf-8')
    try:
        inhalt = yaml.safe_load(text)
    except yaml.YAMLError as e:
        zeile = None
        mark = getattr(e, 'problem_mark', None)
        if mark is not None:
            zeile = mark.line + 1
        raise ParseError(f'{pfad}: ungültiges YAML ({e})', zeile) from None
    if not isinstance(inhalt, dict):
        raise ParseError(f'{pfad}: Konfiguration muss ein Mapping sein')
    return inhalt


def yaml_speichern(pfad, inhalt):
    # type: (str | Path, dict[str, Any]) -> None
    """Schreibt ein dict als YAML (Schlüsselreihenfolge bleibt erhalten)."""
    Path(pfad).write_text(
        yaml.safe_dump(inhalt, sort_keys=False, allow_unicode=True),
        encoding='utf-8',
    )
