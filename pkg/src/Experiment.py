#!/usr/bin/env python3
"""
OurPriv Experimente

Unterbefehle:
- stats      Attributstatistik eines Datensatzes
- privatize  Rauschen addieren und privatisierten Datensatz schreiben
- evaluate   KNN-Kreuzvalidierung (optional mit Rauschen, mehrere Seeds)
- tune       Schwellwert-Schleife über Rauschparameter
- sweep      Raster std x Seeds, Tabelle std gegen Fehler
- plot       Streudiagramm (SVG) aus Plotdaten

Exit-Codes: 0 Erfolg / Schwellwert erreicht, 1 Aufruf- oder
Konfigurationsfehler, 2 Ein-/Ausgabefehler, 3 Budget erschöpft (nur tune).
"""

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

from dataset import CsvSchema, attribute_stats, dump_csv_file, load_csv_file, stats_table, summary_items
from evaluate import evaluate_seeds, sweep, sweep_summary
from knn import TIE_RULES, KnnConfig
from noise import ATTRIBUTE_SCALED, FIXED, MODES, NoiseParams, load_noise_params, noise_delta_stats, privatize
from ourpriv_utils import (
    ConfigError,
    OurPrivError,
    UsageError,
    logging_einrichten,
    parse_float_list,
    parse_seed_list,
)
from reports import (
    FORMAT_TABLE,
    FORMATS,
    cv_items,
    cv_tables,
    format_report,
    plot_data,
    read_plot_data,
    render_scatter,
    seeds_items,
    trace_frame,
    trace_items,
    write_plot_data,
    write_report,
)
from tuner import (
    BUDGET_EXHAUSTED,
    SEED_FIXED,
    SEED_POLICIES,
    ExplicitSchedule,
    MultiplicativeSchedule,
    TuneConfig,
    load_tune_config,
    tune,
)

log = logging.getLogger('ourpriv')

# =============================================================================
# KONFIGURATION
# =============================================================================

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_BUDGET = 3

ENV_OUTPUT_DIR = 'OURPRIV_OUTPUT_DIR'
DEFAULT_OUTPUT_DIR = 'ergebnisse'


@dataclass(frozen=True)
class SweepGrid:
    """Rauschraster eines Sweeps; der Rausch-Seed folgt dem Lauf-Seed."""
    mode: str
    mean: float
    stds: Tuple[float, ...]

    def __post_init__(self):
        for s in self.stds:
            NoiseParams(self.mode, self.mean, s)


@dataclass
class ExperimentConfig:
    command: str
    dataset_path: Path
    schema: CsvSchema = field(default_factory=CsvSchema)
    noise: Optional[NoiseParams] = None
    sweep: Optional[SweepGrid] = None
    noise_seed_follows: bool = True
    tune: Optional[TuneConfig] = None
    knn: KnnConfig = field(default_factory=KnnConfig)
    fold_count: int = 10
    stratified: bool = True
    test_on_original: bool = False
    seeds: List[int] = field(default_factory=lambda: [0])
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)
    report_format: str = FORMAT_TABLE

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError('Seed-Liste darf nicht leer sein')
        if self.report_format not in FORMATS:
            raise ConfigError(f'Unbekanntes Berichtsformat {self.report_format!r}')

    def ausgabe_vorbereiten(self):
        """Ausgabeverzeichnis anlegen und auf Schreibrechte prüfen."""
        self.output_dir.mkdir(parents=True, exist_ok=True)
        if not os.access(self.output_dir, os.W_OK):
            raise PermissionError(f'Ausgabeverzeichnis nicht beschreibbar: {self.output_dir}')

    def items(self):
        """Vollständige, aufgelöste Konfiguration als config.* Schlüssel."""
        s = self.schema
        items = [
            ('config.command', self.command),
            ('config.dataset.path', str(self.dataset_path)),
            ('config.dataset.label_column', s.label_column),
            ('config.dataset.feature_columns', 'auto' if s.feature_columns is None else list(s.feature_columns)),
            ('config.dataset.header', s.header),
            ('config.dataset.delimiter', s.delimiter),
        ]
        if self.tune is not None:
            t = self.tune
            items += [
                ('config.tune.threshold', t.threshold),
                ('config.tune.max_iterations', t.max_iterations),
                ('config.tune.seed', t.seed),
                ('config.tune.seed_policy', t.seed_policy),
                ('config.tune.initial.mode', t.initial.mode),
                ('config.tune.initial.mean', t.initial.mean),
                ('config.tune.initial.std', t.initial.std),
            ]
            if isinstance(t.schedule, MultiplicativeSchedule):
                items += [('config.tune.schedule', 'multiplicative'),
                          ('config.tune.schedule.gamma', t.schedule.gamma)]
            else:
                items.append(('config.tune.schedule', 'explicit'))
                for i, p in enumerate(t.schedule.steps, start=1):
                    items.append((f'config.tune.schedule.step.{i}', f'{p.mode}:{p.mean!r}:{p.std!r}'))
        elif self.sweep is not None:
            items += [
                ('config.sweep.mode', self.sweep.mode),
                ('config.sweep.mean', self.sweep.mean),
                ('config.sweep.stds', list(self.sweep.stds)),
                ('config.sweep.seed', 'run-seed'),
            ]
        elif self.noise is None:
            items.append(('config.noise', 'none'))
        else:
            items += [
                ('config.noise.mode', self.noise.mode),
                ('config.noise.mean', self.noise.mean),
                ('config.noise.std', self.noise.std),
                ('config.noise.seed', 'run-seed' if self.noise_seed_follows else self.noise.seed),
                ('config.test_on_original', self.test_on_original),
            ]
        items += [
            ('config.knn.k', self.knn.k),
            ('config.knn.tie_rule', self.knn.tie_rule),
            ('config.knn.distance', self.knn.distance),
            ('config.fold_count', self.fold_count),
            ('config.stratified', self.stratified),
            ('config.seeds', self.seeds),
            ('config.output_dir', str(self.output_dir)),
            ('config.format', self.report_format),
        ]
        return items


# =============================================================================
# ARGUMENTE
# =============================================================================

class ArgumentParser(argparse.ArgumentParser):
    """argparse mit Exit-Code 1 statt 2 bei Aufruffehlern."""

    def error(self, message):
        raise UsageError(message)


def _schema_argumente(p):
    p.add_argument('--in', dest='input', required=True, help='Eingabedatei (CSV)')
    p.add_argument('--label-column', type=int, default=-1, help='Spalte der Klasse (Standard: letzte)')
    p.add_argument('--feature-columns', default=None, help='Merkmalsspalten, z.B. 0,1,2,3')
    p.add_argument('--header', action='store_true', help='erste Zeile ist Kopfzeile')
    p.add_argument('--delimiter', default=',', help='Trennzeichen (Standard: ,)')


def _rausch_argumente(p, seed_hilfe):
    p.add_argument('--mode', choices=MODES, default=None, help='Rauschmodus')
    p.add_argument('--mean', type=float, default=None, help='Mittelwert bzw. Faktor')
    p.add_argument('--std', type=float, default=None, help='Standardabweichung bzw. Faktor')
    p.add_argument('--seed', type=int, default=None, help=seed_hilfe)
    p.add_argument('--noise-config', default=None, help='Rauschparameter als YAML-Datei')


def _knn_argumente(p):
    p.add_argument('--k', type=int, default=1, help='Anzahl Nachbarn (Standard: 1)')
    p.add_argument('--tie-rule', choices=TIE_RULES, default=TIE_RULES[0])
    p.add_argument('--folds', type=int, default=10, help='Anzahl Faltungen (Standard: 10)')
    p.add_argument('--unstratified', action='store_true', help='Faltungen ohne Stratifizierung')


def _ausgabe_argumente(p):
    p.add_argument('--out-dir', default=None,
                   help=f'Ausgabeverzeichnis (Standard: ${ENV_OUTPUT_DIR} oder ./{DEFAULT_OUTPUT_DIR})')
    p.add_argument('--format', choices=FORMATS, default=FORMAT_TABLE, help='Berichtsformat')


def build_parser():
    parser = ArgumentParser(prog='Experiment.py',
                            description='Datenschutz durch Rauschaddition, Datennutzen per KNN')
    parser.add_argument('--verbose', action='store_true', help='Debug-Ausgaben')
    sub = parser.add_subparsers(dest='command', required=True, parser_class=ArgumentParser)

    p = sub.add_parser('stats', help='Attributstatistik')
    _schema_argumente(p)
    p.add_argument('--sample-std', action='store_true', help='Divisor n-1 statt n')
    _ausgabe_argumente(p)

    p = sub.add_parser('privatize', help='Rauschen addieren')
    _schema_argumente(p)
    _rausch_argumente(p, 'Seed des Rauschens (Standard: 0)')
    p.add_argument('--out', default=None, help='Ausgabedatei (Standard: <out-dir>/<name>_privat.csv)')
    _ausgabe_argumente(p)

    p = sub.add_parser('evaluate', help='KNN-Kreuzvalidierung')
    _schema_argumente(p)
    _rausch_argumente(p, 'fester Seed des Rauschens (Standard: Lauf-Seed)')
    _knn_argumente(p)
    p.add_argument('--seeds', default='0', help='Seeds, z.B. 0-19 oder 1,5,7')
    p.add_argument('--test-on-original', action='store_true',
                   help='privatisiert trainieren, gegen Original testen')
    p.add_argument('--plot-data', action='store_true', help='Plotdaten (erster Seed) schreiben')
    _ausgabe_argumente(p)

    p = sub.add_parser('tune', help='Schwellwert-Schleife')
    _schema_argumente(p)
    p.add_argument('--config', default=None, help='Tuner-Konfiguration als YAML-Datei')
    _rausch_argumente(p, 'Basis-Seed (Standard: 0)')
    p.add_argument('--threshold', type=float, default=None, help='Fehlerschwelle in [0, 1]')
    p.add_argument('--gamma', type=float, default=0.5, help='Faktor der std je Schritt')
    p.add_argument('--step', nargs=3, action='append', metavar=('MODE', 'MEAN', 'STD'),
                   help='explizite Parameterliste (mehrfach angeben)')
    p.add_argument('--max-iterations', type=int, default=10)
    p.add_argument('--seed-policy', choices=SEED_POLICIES, default=SEED_FIXED)
    _knn_argumente(p)
    _ausgabe_argumente(p)

    p = sub.add_parser('sweep', help='Raster std x Seeds')
    _schema_argumente(p)
    p.add_argument('--mode', choices=MODES, default=FIXED)
    p.add_argument('--mean', type=float, default=None)
    p.add_argument('--stds', default='0,0.05,0.1,0.5', help='std-Werte, z.B. 0,0.05,0.1,0.5')
    p.add_argument('--seeds', default='0-19')
    p.add_argument('--jobs', type=int, default=1, help='parallele Zellen (Ausgabe bleibt gleich)')
    _knn_argumente(p)
    _ausgabe_argumente(p)

    p = sub.add_parser('plot', help='Streudiagramm aus Plotdaten oder Bericht')
    p.add_argument('--in', dest='input', required=True, help='Plotdaten (CSV) oder kv-Bericht')
    p.add_argument('--out', default=None, help='SVG-Datei (Standard: <out-dir>/plot.svg)')
    p.add_argument('--title', default='KNN-Klassifikation')
    p.add_argument('--no-timestamp', action='store_true', help='kein Datum in den SVG-Metadaten')
    _ausgabe_argumente(p)
    return parser


# =============================================================================
# AUFLÖSUNG
# =============================================================================

def _output_dir(args):
    return Path(args.out_dir or os.environ.get(ENV_OUTPUT_DIR) or DEFAULT_OUTPUT_DIR)


def _schema(args):
    spalten = None
    if args.feature_columns:
        try:
            spalten = tuple(int(c) for c in args.feature_columns.split(','))
        except ValueError:
            raise ConfigError(f'Ungültige Merkmalsspalten: {args.feature_columns!r}') from None
    return CsvSchema(args.label_column, spalten, args.header, args.delimiter)


def _noise(args, standard_seed=0):
    """NoiseParams aus YAML und Flags (Flags überschreiben die Datei); None ohne Angaben."""
    if args.noise_config:
        basis = load_noise_params(args.noise_config)
    elif any(v is not None for v in (args.mode, args.mean, args.std)):
        basis = NoiseParams.attribute_scaled() if args.mode == ATTRIBUTE_SCALED else NoiseParams()
    else:
        return None
    werte = basis.to_dict()
    for key in ('mode', 'mean', 'std', 'seed'):
        wert = getattr(args, key)
        if wert is not None:
            werte[key] = wert
    if args.seed is None and not args.noise_config:
        werte['seed'] = standard_seed
    return NoiseParams.from_dict(werte)


def _experiment(args, **extra):
    knn = KnnConfig(args.k, args.tie_rule) if hasattr(args, 'k') else KnnConfig()
    config = ExperimentConfig(
        command=args.command,
        dataset_path=Path(args.input),
        schema=_schema(args),
        knn=knn,
        fold_count=getattr(args, 'folds', 10),
        stratified=not getattr(args, 'unstratified', False),
        output_dir=_output_dir(args),
        report_format=args.format,
        **extra,
    )
    return config


def _ausgeben(config, name, items, tables=None):
    text = format_report(config.items() + items, tables, config.report_format)
    sys.stdout.write(text)
    return write_report(config.output_dir / name, config.items() + items, tables, config.report_format)


# =============================================================================
# BEFEHLE
# =============================================================================

def cmd_stats(args):
    config = _experiment(args)
    data = load_csv_file(config.dataset_path, config.schema)
    config.ausgabe_vorbereiten()
    stats = attribute_stats(data, ddof=1 if args.sample_std else 0)
    _ausgeben(config, 'bericht_stats.txt', summary_items(data, stats),
              {'attribute_stats': stats_table(data, stats)})
    return EXIT_OK


def cmd_privatize(args):
    noise = _noise(args) or NoiseParams()
    config = _experiment(args, noise=noise, noise_seed_follows=False)
    data = load_csv_file(config.dataset_path, config.schema)
    config.ausgabe_vorbereiten()

    privat = privatize(data, noise)
    ziel = Path(args.out) if args.out else config.output_dir / f'{config.dataset_path.stem}_privat.csv'
    dump_csv_file(privat, ziel, config.schema)
    log.info(f'Privatisierter Datensatz geschrieben: {ziel}')

    items = [('dataset.n', data.n), ('dataset.d', data.d), ('output.dataset', str(ziel))]
    _ausgeben(config, 'bericht_privatize.txt', items, {'noise_delta': noise_delta_stats(data, privat)})
    return EXIT_OK


def cmd_evaluate(args):
    seeds = parse_seed_list(args.seeds)
    noise = _noise(args)
    config = _experiment(args, noise=noise, seeds=seeds,
                         noise_seed_follows=args.seed is None and not args.noise_config,
                         test_on_original=args.test_on_original)
    data = load_csv_file(config.dataset_path, config.schema)
    config.ausgabe_vorbereiten()

    summary = evaluate_seeds(data, seeds, config.knn, config.fold_count, noise, config.stratified,
                             config.test_on_original, config.noise_seed_follows)
    erstes = summary.results[0]
    items = [('dataset.n', data.n), ('dataset.d', data.d), ('result.seed', seeds[0])]
    items += cv_items(erstes) + seeds_items(summary)

    if args.plot_data:
        gesehen = data
        if noise is not None and not config.test_on_original:
            gesehen = privatize(data, noise.with_seed(seeds[0]) if config.noise_seed_follows else noise)
        ziel = write_plot_data(plot_data(erstes, gesehen), config.output_dir / 'plotdaten_evaluate.csv')
        items.append(('output.plot_data', ziel.name))

    _ausgeben(config, 'bericht_evaluate.txt', items, cv_tables(erstes))
    return EXIT_OK


def _tune_config(args):
    if args.config:
        return load_tune_config(args.config)
    if args.threshold is None:
        raise ConfigError('--threshold oder --config erforderlich')
    if args.step:
        try:
            schritte = tuple(NoiseParams(m, float(mu), float(s)) for m, mu, s in args.step)
        except ValueError as e:
            raise ConfigError(f'--step: {e}') from None
        schedule = ExplicitSchedule(schritte)
        initial = _noise(args) or schritte[0]
    else:
        schedule = MultiplicativeSchedule(args.gamma)
        initial = _noise(args)
        if initial is None:
            raise ConfigError('Start-Rauschen (--mode/--mean/--std) erforderlich')
    return TuneConfig(
        threshold=args.threshold,
        initial=initial,
        schedule=schedule,
        max_iterations=args.max_iterations,
        knn=KnnConfig(args.k, args.tie_rule),
        fold_count=args.folds,
        seed=args.seed if args.seed is not None else 0,
        seed_policy=args.seed_policy,
        stratified=not args.unstratified,
    )


def cmd_tune(args):
    tcfg = _tune_config(args)
    config = _experiment(args, tune=tcfg, seeds=[tcfg.seed])
    config.knn = tcfg.knn
    config.fold_count = tcfg.fold_count
    config.stratified = tcfg.stratified
    data = load_csv_file(config.dataset_path, config.schema)
    config.ausgabe_vorbereiten()

    trace = tune(data, tcfg)
    _ausgeben(config, 'bericht_tune.txt', trace_items(trace), {'steps': trace_frame(trace)})
    return EXIT_BUDGET if trace.outcome == BUDGET_EXHAUSTED else EXIT_OK


def cmd_sweep(args):
    stds = parse_float_list(args.stds, '--stds')
    seeds = parse_seed_list(args.seeds)
    mean = args.mean if args.mean is not None else (1.0 if args.mode == ATTRIBUTE_SCALED else 0.0)
    config = _experiment(args, sweep=SweepGrid(args.mode, mean, tuple(stds)), seeds=seeds)
    data = load_csv_file(config.dataset_path, config.schema)
    config.ausgabe_vorbereiten()

    zellen = sweep(data, stds, seeds, config.knn, config.fold_count, args.mode, mean,
                   config.stratified, args.jobs)
    tabelle = sweep_summary(zellen)
    items = [('sweep.stds', stds)]
    for _, zeile in tabelle.iterrows():
        items.append((f'sweep.std.{float(zeile["std"])!r}.mean_error', float(zeile['mean_error'])))
    _ausgeben(config, 'bericht_sweep.txt', items, {'summary': tabelle, 'cells': zellen})
    return EXIT_OK


def cmd_plot(args):
    df = read_plot_data(args.input)
    ausgabe = _output_dir(args)
    ziel = Path(args.out) if args.out else ausgabe / 'plot.svg'
    ziel.parent.mkdir(parents=True, exist_ok=True)
    render_scatter(df, ziel, args.title, timestamp=not args.no_timestamp)
    punkte = write_plot_data(df, ziel.with_name(f'{ziel.stem}_punkte.csv'))
    falsch = int((~df['correct']).sum())
    print(f'{len(df)} Punkte, {falsch} falsch klassifiziert -> {ziel} ({punkte.name})')
    return EXIT_OK


BEFEHLE = {
    'stats': cmd_stats,
    'privatize': cmd_privatize,
    'evaluate': cmd_evaluate,
    'tune': cmd_tune,
    'sweep': cmd_sweep,
    'plot': cmd_plot,
}

# =============================================================================
# MAIN
# =============================================================================

def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        logging_einrichten()
        log.error(f'Fehler: {e}')
        return EXIT_CONFIG
    logging_einrichten(args.verbose)
    try:
        return BEFEHLE[args.command](args)
    except OurPrivError as e:
        log.error(f'Fehler: {e}')
        return EXIT_CONFIG
    except OSError as e:
        log.error(f'Fehler: {e}')
        return EXIT_IO


if __name__ == '__main__':
    sys.exit(main())
