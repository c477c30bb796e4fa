import itertools
from types import SimpleNamespace

import pytest

import tuner as tuner_modul
from evaluate import cross_validate, pipeline_evaluate
from knn import KnnConfig
from noise import NoiseParams
from ourpriv_utils import ConfigError, ParseError
from tuner import (
    BUDGET_EXHAUSTED,
    MET_THRESHOLD,
    SEED_FRESH,
    ExplicitSchedule,
    MultiplicativeSchedule,
    TuneConfig,
    load_tune_config,
    tune,
)


def _fixed(std, mean=0.0):
    return NoiseParams.fixed(mean, std)


# ----------------- Konfiguration -----------------

@pytest.mark.parametrize('gamma', [0.0, 1.0, 1.5, -0.5])
def test_gamma_ungueltig(gamma):
    with pytest.raises(ConfigError):
        MultiplicativeSchedule(gamma)


def test_schedule_leer():
    with pytest.raises(ConfigError):
        ExplicitSchedule(())


@pytest.mark.parametrize('aenderung', [
    {'threshold': 1.5},
    {'threshold': -0.1},
    {'max_iterations': 0},
    {'fold_count': 1},
    {'seed_policy': 'zufall'},
    {'initial': NoiseParams.fixed(0.0, 0.0)},
])
def test_konfiguration_ungueltig(aenderung):
    werte = {'threshold': 0.1, 'initial': _fixed(0.5)} | aenderung
    with pytest.raises(ConfigError):
        TuneConfig(**werte)


def test_multiplikativ_exakt():
    schritte = MultiplicativeSchedule(0.5).params(_fixed(1.0))
    werte = [next(schritte).std for _ in range(5)]
    assert werte == [1.0, 0.5, 0.25, 0.125, 0.0625]


def test_multiplikativ_endet_bei_unterlauf():
    werte = [p.std for p in itertools.islice(MultiplicativeSchedule(0.5).params(_fixed(1.0)), 1200)]
    assert len(werte) == 1076
    assert werte[-1] == 0.0
    assert all(b < a for a, b in zip(werte, werte[1:]))


def test_tune_std_streng_fallend_bei_grossem_budget(iris, monkeypatch):
    monkeypatch.setattr(tuner_modul, 'pipeline_evaluate',
                        lambda *args, **kwargs: SimpleNamespace(overall_error=1.0))
    trace = tune(iris, TuneConfig(0.0, _fixed(1.0), MultiplicativeSchedule(0.5), max_iterations=1200))
    stds = [s.params.std for s in trace.steps]
    assert trace.outcome == BUDGET_EXHAUSTED
    assert len(stds) == 1076
    assert all(b < a for a, b in zip(stds, stds[1:]))


def test_seed_strategie():
    fest = TuneConfig(0.1, _fixed(0.5), seed=7)
    frisch = TuneConfig(0.1, _fixed(0.5), seed=7, seed_policy=SEED_FRESH)
    assert [fest.seed_for(i) for i in range(3)] == [7, 7, 7]
    assert [frisch.seed_for(i) for i in range(3)] == [7, 8, 9]


def test_yaml_multiplikativ(tmp_path):
    pfad = tmp_path / 'tune.yaml'
    pfad.write_text(
        'threshold: 0.08\n'
        'max_iterations: 4\n'
        'seed: 3\n'
        'knn: {k: 3}\n'
        'initial: {mode: fixed, mean: 0.0, std: 0.8}\n'
        'schedule: {type: multiplicative, gamma: 0.25}\n',
        encoding='utf-8',
    )
    cfg = load_tune_config(pfad)
    assert cfg.threshold == 0.08
    assert cfg.schedule == MultiplicativeSchedule(0.25)
    assert cfg.knn == KnnConfig(k=3)
    assert cfg.initial == _fixed(0.8)
    assert TuneConfig.from_dict(cfg.to_dict()) == cfg


def test_yaml_explizit(tmp_path):
    pfad = tmp_path / 'tune.yaml'
    pfad.write_text(
        'threshold: 0.3\n'
        'schedule:\n'
        '  type: explicit\n'
        '  steps:\n'
        '    - {mode: attribute-scaled, mean: 1.0, std: 1.0}\n'
        '    - {mode: fixed, mean: 0.0, std: 0.1}\n',
        encoding='utf-8',
    )
    cfg = load_tune_config(pfad)
    assert cfg.schedule.steps == (NoiseParams.attribute_scaled(), _fixed(0.1))
    assert cfg.initial == NoiseParams.attribute_scaled()


@pytest.mark.parametrize('text, fehler', [
    ('max_iterations: 3\n', ConfigError),
    ('threshold: 0.1\nschedule: {type: linear}\n', ConfigError),
    ('threshold: 0.1\nschedule: {type: multiplicative, faktor: 2}\n', ConfigError),
    ('threshold: 0.1\nschedule: {type: multiplicative}\n', ConfigError),
    ('threshold: 0.1\ninitial: {std: 1}\nknn: {k: 3, m: 1}\n', ConfigError),
    ('threshold: 0.1\nepsilon: 1\n', ConfigError),
    ('threshold: [0.1\n', ParseError),
])
def test_yaml_fehler(tmp_path, text, fehler):
    pfad = tmp_path / 'tune.yaml'
    pfad.write_text(text, encoding='utf-8')
    with pytest.raises(fehler):
        load_tune_config(pfad)


# ----------------- Schleife -----------------

def test_schwelle_eins_stoppt_sofort(iris):
    trace = tune(iris, TuneConfig(1.0, _fixed(0.5)))
    assert trace.outcome == MET_THRESHOLD
    assert len(trace.steps) == 1
    assert trace.accepted == _fixed(0.5)


def test_explizit_bis_nullrauschen(iris):
    grund = cross_validate(iris, seed=0).overall_error
    schritte = (NoiseParams.attribute_scaled(), _fixed(0.5), _fixed(0.0))
    trace = tune(iris, TuneConfig(grund, schritte[0], ExplicitSchedule(schritte)))
    assert trace.outcome == MET_THRESHOLD
    assert trace.steps[-1].error <= grund
    assert trace.steps[0].decision == 'adjust'
    assert trace.steps[-1].decision == MET_THRESHOLD


def test_zwei_schritte(iris):
    schritte = (NoiseParams.attribute_scaled(1.0, 1.0), _fixed(0.1))
    trace = tune(iris, TuneConfig(0.30, schritte[0], ExplicitSchedule(schritte)))
    assert [s.index for s in trace.steps] == [1, 2]
    assert trace.steps[0].error > 0.30
    assert trace.steps[1].error < trace.steps[0].error
    assert trace.outcome == MET_THRESHOLD
    assert trace.accepted == _fixed(0.1)


def test_budget_erschoepft(iris):
    trace = tune(iris, TuneConfig(0.0, _fixed(1.0), MultiplicativeSchedule(0.5), max_iterations=5))
    assert trace.outcome == BUDGET_EXHAUSTED
    assert trace.accepted is None
    assert len(trace.steps) == 5
    stds = [s.params.std for s in trace.steps]
    assert stds == [1.0, 0.5, 0.25, 0.125, 0.0625]
    assert all(s.decision == 'adjust' for s in trace.steps)


def test_explizite_liste_kuerzer_als_budget(iris):
    schritte = (_fixed(2.0), _fixed(1.5))
    trace = tune(iris, TuneConfig(0.0, schritte[0], ExplicitSchedule(schritte), max_iterations=10))
    assert trace.outcome == BUDGET_EXHAUSTED
    assert len(trace.steps) == 2


@pytest.mark.parametrize('policy', ['fixed', SEED_FRESH])
def test_protokoll_nachrechenbar(iris, policy):
    tcfg = TuneConfig(0.0, _fixed(0.8), MultiplicativeSchedule(0.5), max_iterations=3,
                      knn=KnnConfig(k=3), seed=5, seed_policy=policy)
    trace = tune(iris, tcfg)
    for i, schritt in enumerate(trace.steps):
        assert schritt.fold_seed == tcfg.seed_for(i)
        assert schritt.params.seed == schritt.fold_seed
        nochmal = pipeline_evaluate(iris, schritt.params, tcfg.knn, tcfg.fold_count, schritt.fold_seed)
        assert nochmal.overall_error == schritt.error


def test_faltungen_vor_auswertung_geprueft(iris, monkeypatch):
    def nicht_aufrufen(*args, **kwargs):
        raise AssertionError('Auswertung trotz ungültiger Faltungen')

    monkeypatch.setattr(tuner_modul, 'pipeline_evaluate', nicht_aufrufen)
    with pytest.raises(ConfigError):
        tune(iris, TuneConfig(0.1, _fixed(0.5), fold_count=51))
