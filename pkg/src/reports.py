"""
Berichte und Plots.

Zwei Berichtsformate, beide mit dem Schlüssel format_version:
- kv: eine Zeile je Schlüssel (key=value), Tabellen als '#'-Kommentarblock
  im CSV-Format darunter. Die Schlüsselmenge ist stabil.
- table: ausgerichtete Schlüssel und Tabellen für Menschen.
"""

from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from dataset import Dataset  # noqa: E402
from evaluate import CvResult, SeedSummary  # noqa: E402
from ourpriv_utils import ConfigError, ReportError  # noqa: E402
from tuner import TuneTrace  # noqa: E402

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
FORMAT_KV = 'kv'
FORMAT_TABLE = 'table'
FORMATS = (FORMAT_KV, FORMAT_TABLE)

PLOT_COLUMNS = ['record', 'true', 'predicted', 'correct', 'x', 'y']
AXIS_NAME_COLUMNS = ['x_name', 'y_name']
KLASSEN_FARBEN = ['#3498db', '#27ae60', '#f39c12', '#8e44ad', '#16a085', '#7f8c8d']

# ----------------- Formatierung -----------------

def _wert(v):
    if v is None:
        return ''
    if isinstance(v, (bool, np.bool_)):
        return 'true' if v else 'false'
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (list, tuple, np.ndarray)):
        return ','.join(_wert(x) for x in v)
    return str(v).replace('\n', ' ')


def format_report(items, tables=None, fmt=FORMAT_KV):
    # type: (list[tuple[str, object]], dict[str, pd.DataFrame] | None, str) -> str
    """Bericht als Text; items sind (Schlüssel, Wert)-Paare in fester Reihenfolge."""
    if fmt not in FORMATS:
        raise ConfigError(f'Unbekanntes Berichtsformat {fmt!r} (erlaubt: {", ".join(FORMATS)})')
    tables = tables or {}
    alle = [('format_version', FORMAT_VERSION)] + list(items)
    zeilen = []
    if fmt == FORMAT_KV:
        zeilen += [f'{k}={_wert(v)}' for k, v in alle]
        for name, df in tables.items():
            zeilen.append(f'# table {name}')
            csv_text = df.to_csv(lineterminator='\n', index=df.index.name is not None)
            zeilen += [f'# {z}' for z in csv_text.rstrip('\n').split('\n')]
    else:
        breite = max(len(k) for k, _ in alle)
        zeilen += [f'{k.ljust(breite)} : {_wert(v)}' for k, v in alle]
        for name, df in tables.items():
            zeilen += ['', f'== {name} ==', df.to_string(index=df.index.name is not None)]
    return '\n'.join(zeilen) + '\n'


def write_report(pfad, items, tables=None, fmt=FORMAT_KV):
    # type: (str | Path, list[tuple[str, object]], dict[str, pd.DataFrame] | None, str) -> Path
    pfad = Path(pfad)
    pfad.write_text(format_report(items, tables, fmt), encoding='utf-8')
    log.info(f'Bericht geschrieben: {pfad}')
    return pfad


def read_kv_report(pfad):
    # type: (str | Path) -> dict[str, str]
    """Liest die Schlüssel eines kv-Berichts (Kommentarzeilen werden übersprungen)."""
    werte = {}
    for zeile in Path(pfad).read_text(encoding='utf-8').splitlines():
        if not zeile or zeile.startswith('#'):
            continue
        if '=' not in zeile:
            raise ReportError(f'{pfad}: keine key=value Zeile: {zeile!r}')
        k, v = zeile.split('=', 1)
        werte[k] = v
    if 'format_version' not in werte:
        raise ReportError(f'{pfad}: format_version fehlt, kein kv-Bericht')
    return werte


# ----------------- Berichtsinhalte -----------------

def cv_items(result, prefix='result'):
    # type: (CvResult, str) -> list[tuple[str, object]]
    items = [
        (f'{prefix}.n', result.n),
        (f'{prefix}.misclassified', result.misclassified),
        (f'{prefix}.overall_error', result.overall_error),
        (f'{prefix}.per_fold_error', result.per_fold_error),
        (f'{prefix}.fold_sizes', result.fold_assignment.sizes()),
    ]
    cm = result.confusion_matrix
    for i, a in enumerate(result.class_names):
        for j, p in enumerate(result.class_names):
            items.append((f'{prefix}.confusion.{a}.{p}', int(cm[i, j])))
    return items


def cv_tables(result):
    # type: (CvResult) -> dict[str, pd.DataFrame]
    je_faltung = pd.DataFrame({
        'size': result.fold_assignment.sizes(),
        'error': result.per_fold_error,
    }, index=pd.RangeIndex(result.fold_assignment.fold_count, name='fold'))
    return {'confusion_matrix': result.confusion_frame(), 'per_fold': je_faltung}


def seeds_items(summary):
    # type: (SeedSummary) -> list[tuple[str, object]]
    items = [(f'run.{s}.error', r.overall_error) for s, r in zip(summary.seeds, summary.results)]
    items += [
        ('summary.runs', len(summary.seeds)),
        ('summary.mean_error', summary.mean_error),
        ('summary.min_error', summary.min_error),
        ('summary.max_error', summary.max_error),
    ]
    return items


def trace_frame(trace):
    # type: (TuneTrace) -> pd.DataFrame
    """Eine Zeile je Schritt: step, mode, mean, std, seed, error, decision."""
    return pd.DataFrame({
        'step': [s.index for s in trace.steps],
        'mode': [s.params.mode for s in trace.steps],
        'mean': [s.params.mean for s in trace.steps],
        'std': [s.params.std for s in trace.steps],
        'seed': [s.fold_seed for s in trace.steps],
        'error': [s.error for s in trace.steps],
        'decision': [s.decision for s in trace.steps],
    })


def trace_items(trace):
    # type: (TuneTrace) -> list[tuple[str, object]]
    items = []
    for s in trace.steps:
        p = f'step.{s.index}'
        items += [(f'{p}.mode', s.params.mode), (f'{p}.mean', s.params.mean),
                  (f'{p}.std', s.params.std), (f'{p}.seed', s.fold_seed),
                  (f'{p}.error', s.error), (f'{p}.decision', s.decision)]
    items += [('outcome', trace.outcome), ('steps', len(trace.steps))]
    if trace.accepted is not None:
        a = trace.accepted
        items += [('accepted.mode', a.mode), ('accepted.mean', a.mean),
                  ('accepted.std', a.std), ('accepted.seed', a.seed)]
    return items


# ----------------- Plotdaten -----------------

def plot_data(result, data):
    # type: (CvResult, Dataset) -> pd.DataFrame
    """
    Je Datensatz: Index, wahre und vorhergesagte Klasse, korrekt-Flag und die
    ersten beiden Merkmale als Koordinaten (bei d = 1 ist y = 0). Die
    Achsennamen stehen in df.attrs und als Spalten x_name/y_name in der CSV.
    """
    if data.n != result.n:
        raise ConfigError(f'Datensatz ({data.n}) passt nicht zum Ergebnis ({result.n})')
    x = data.features[:, 0]
    y = data.features[:, 1] if data.d > 1 else np.zeros(data.n)
    x_name = data.attribute_names[0]
    y_name = data.attribute_names[1] if data.d > 1 else ''
    df = pd.DataFrame({
        'record': np.arange(data.n),
        'true': list(result.truths),
        'predicted': list(result.predictions),
        'correct': result.predictions == result.truths,
        'x': x,
        'y': y,
        'x_name': x_name,
        'y_name': y_name,
    })
    df.attrs['x_name'] = x_name
    df.attrs['y_name'] = y_name
    return df


def write_plot_data(df, pfad):
    # type: (pd.DataFrame, str | Path) -> Path
    pfad = Path(pfad)
    df.to_csv(pfad, index=False, lineterminator='\n')
    log.info(f'Plotdaten geschrieben: {pfad}')
    return pfad


def read_plot_data(pfad):
    # type: (str | Path) -> pd.DataFrame
    """
    Liest Plotdaten (CSV) oder folgt dem Eintrag output.plot_data eines
    kv-Berichts.

    Raises:
        OSError: Datei fehlt.
        ReportError: Spalten fehlen, keine Datensätze, oder der Bericht
            verweist auf keine Plotdaten.

    """
    pfad = Path(pfad)
    with open(pfad, encoding='utf-8') as f:
        erste = f.readline()
    if erste.startswith('format_version='):
        ziel = read_kv_report(pfad).get('output.plot_data')
        if not ziel:
            raise ReportError(f'{pfad}: Bericht enthält keine Plotdaten (output.plot_data)')
        return read_plot_data(pfad.parent / ziel)

    try:
        df = pd.read_csv(pfad, dtype={'true': str, 'predicted': str,
                                      'x_name': str, 'y_name': str})
    except pd.errors.EmptyDataError:
        raise ReportError(f'{pfad}: leere Plotdaten') from None
    fehlend = [c for c in PLOT_COLUMNS if c not in df.columns]
    if fehlend:
        raise ReportError(f'{pfad}: Spalten fehlen: {fehlend}')
    if df.empty:
        raise ReportError(f'{pfad}: Plotdaten ohne Datensätze')
    df['correct'] = df['correct'].astype(str).str.lower() == 'true'
    # leere Namen (d = 1) liest pandas als NaN
    for spalte in AXIS_NAME_COLUMNS:
        if spalte in df.columns:
            df[spalte] = df[spalte].fillna('')
            df.attrs[spalte] = df[spalte].iloc[0]
    return df


def render_scatter(df, pfad, title='KNN-Klassifikation', timestamp=True):
    # type: (pd.DataFrame, str | Path, str, bool) -> Path
    """
    Streudiagramm über die ersten beiden Merkmale als SVG.

    Korrekt klassifizierte Punkte in der Farbe ihrer Klasse, falsch
    klassifizierte zusätzlich mit rotem Kreuz. timestamp=False lässt das
    Datum aus den SVG-Metadaten weg (bytegleiche Ausgabe).
    """
    if df.empty:
        raise ReportError('Keine Datensätze zum Plotten')
    pfad = Path(pfad)
    falsch = ~df['correct'].to_numpy(dtype=bool)
    fehler = falsch.mean()

    with plt.rc_context({'svg.hashsalt': 'ourpriv', 'svg.fonttype': 'none'}):
        fig, ax = plt.subplots(figsize=(8, 6))
        for i, klasse in enumerate(dict.fromkeys(df['true'])):
            auswahl = (df['true'] == klasse).to_numpy()
            ax.scatter(df['x'][auswahl], df['y'][auswahl], s=25,
                       c=KLASSEN_FARBEN[i % len(KLASSEN_FARBEN)], label=klasse)
        ax.scatter(df['x'][falsch], df['y'][falsch], s=90, marker='x', c='#e74c3c',
                   label=f'falsch klassifiziert ({int(falsch.sum())})')
        ax.set_xlabel(df.attrs.get('x_name') or 'Merkmal 1')
        ax.set_ylabel(df.attrs.get('y_name') or 'Merkmal 2')
        ax.set_title(f'{title} - Klassifikationsfehler {fehler:.4f}')
        ax.grid(True, ls='--', alpha=0.5)
        ax.legend()
        fig.tight_layout()
        fig.savefig(pfad, format='svg', metadata=None if timestamp else {'Date': None})
        plt.close(fig)
    log.info(f'Plot geschrieben: {pfad}')
    return pfad
