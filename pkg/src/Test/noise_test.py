import math

import numpy as np
import pytest

from dataset import Dataset, attribute_stats
from noise import (
    ATTRIBUTE_SCALED,
    FIXED,
    NoiseParams,
    dump_noise_params,
    load_noise_params,
    noise_delta_stats,
    noise_location_scale,
    privatize,
    sample_gaussian,
)
from ourpriv_utils import ConfigError, ParseError, make_rng

# ----------------- Generator -----------------

def test_sampler_ohne_streuung():
    rng = make_rng(1)
    assert sample_gaussian(rng, 0.0, 0.0, 3).tolist() == [0.0, 0.0, 0.0]
    assert sample_gaussian(rng, 5.0, 0.0, 2).tolist() == [5.0, 5.0]


def test_sampler_ohne_streuung_verbraucht_nichts():
    a = make_rng(4)
    b = make_rng(4)
    sample_gaussian(a, 1.0, 0.0, 10)
    assert a.standard_normal() == b.standard_normal()


@pytest.mark.parametrize('std', [-1.0, math.nan, math.inf])
def test_sampler_ungueltige_streuung(std):
    with pytest.raises(ConfigError):
        sample_gaussian(make_rng(0), 0.0, std, 3)


@pytest.mark.parametrize('count', [0, -1, 2.5, True])
def test_sampler_ungueltige_anzahl(count):
    with pytest.raises(ConfigError):
        sample_gaussian(make_rng(0), 0.0, 1.0, count)


def test_sampler_momente():
    werte = sample_gaussian(make_rng(12345), 0.0, 1.0, 100_000)
    assert abs(werte.mean()) <= 0.01
    assert 0.99 <= werte.std() <= 1.01


def test_sampler_reproduzierbar():
    a = sample_gaussian(make_rng(99), 2.0, 0.5, 1000)
    b = sample_gaussian(make_rng(99), 2.0, 0.5, 1000)
    assert a.tobytes() == b.tobytes()


# ----------------- Parameter -----------------

def test_params_pruefung():
    with pytest.raises(ConfigError):
        NoiseParams('uniform', 0.0, 1.0)
    with pytest.raises(ConfigError):
        NoiseParams.fixed(0.0, -0.1)
    with pytest.raises(ConfigError):
        NoiseParams.fixed(math.nan, 0.1)
    with pytest.raises(ConfigError):
        NoiseParams.fixed(0.0, 0.1, seed=-1)


def test_params_nullrauschen():
    assert NoiseParams().is_zero
    assert NoiseParams.attribute_scaled(0.0, 0.0).is_zero
    assert not NoiseParams.fixed(0.0, 0.1).is_zero
    assert not NoiseParams.attribute_scaled().is_zero


def test_params_yaml(tmp_path):
    pfad = tmp_path / 'rauschen.yaml'
    params = NoiseParams.attribute_scaled(1.0, 0.25, seed=17)
    dump_noise_params(params, pfad)
    assert load_noise_params(pfad) == params


def test_params_yaml_standardwerte(tmp_path):
    pfad = tmp_path / 'rauschen.yaml'
    pfad.write_text('mode: attribute-scaled\nstd: 0.5\n', encoding='utf-8')
    assert load_noise_params(pfad) == NoiseParams(ATTRIBUTE_SCALED, 1.0, 0.5, 0)


def test_params_yaml_fehler(tmp_path):
    pfad = tmp_path / 'rauschen.yaml'
    pfad.write_text('std: 0.1\nsigma: 2\n', encoding='utf-8')
    with pytest.raises(ConfigError):
        load_noise_params(pfad)
    pfad.write_text('- 1\n- 2\n', encoding='utf-8')
    with pytest.raises(ParseError):
        load_noise_params(pfad)
    with pytest.raises(OSError):
        load_noise_params(tmp_path / 'fehlt.yaml')


# ----------------- Privatisierung -----------------

def test_nullrauschen_identitaet(iris):
    privat = privatize(iris, NoiseParams.fixed(0.0, 0.0, seed=42))
    assert privat.features.tobytes() == iris.features.tobytes()
    assert list(privat.labels) == list(iris.labels)


def test_verschiebung_ohne_streuung():
    data = Dataset.from_arrays([[3.0]], ['A'])
    assert privatize(data, NoiseParams.fixed(10.0, 0.0)).features.tolist() == [[13.0]]


def test_iris_rauschen_statistik(iris):
    privat = privatize(iris, NoiseParams.fixed(0.0, 0.1, seed=42))
    delta = privat.features - iris.features
    grenze = 3 * 0.1 / math.sqrt(600)
    assert abs(delta.mean()) <= grenze
    assert abs(delta.std() - 0.1) <= grenze


def test_form_und_klassen_bleiben(iris):
    privat = privatize(iris, NoiseParams.attribute_scaled(seed=3))
    assert privat.features.shape == (150, 4)
    assert list(privat.labels) == list(iris.labels)
    assert privat.class_names == iris.class_names
    assert privat.attribute_names == iris.attribute_names


def test_privatisierung_reproduzierbar(iris):
    a = privatize(iris, NoiseParams.fixed(0.0, 0.3, seed=8))
    b = privatize(iris, NoiseParams.fixed(0.0, 0.3, seed=8))
    c = privatize(iris, NoiseParams.fixed(0.0, 0.3, seed=9))
    assert a.features.tobytes() == b.features.tobytes()
    assert not np.array_equal(a.features, c.features)


def test_zeilenweise_ziehung():
    data = Dataset.from_arrays(np.zeros((3, 2)), ['A', 'B', 'C'])
    privat = privatize(data, NoiseParams.fixed(0.0, 1.0, seed=5))
    erwartet = make_rng(5).standard_normal(6).reshape(3, 2)
    assert np.array_equal(privat.features, erwartet)


def test_attributskaliert_verschiebung(iris):
    stats = attribute_stats(iris)
    privat = privatize(iris, NoiseParams.attribute_scaled(1.0, 0.0))
    assert np.array_equal(privat.features, iris.features + stats.mean)


def test_attributskaliert_lage_und_skala(iris):
    stats = attribute_stats(iris)
    loc, scale = noise_location_scale(iris, NoiseParams.attribute_scaled(0.5, 2.0))
    assert np.array_equal(loc, 0.5 * stats.mean)
    assert np.array_equal(scale, 2.0 * stats.std)
    loc, scale = noise_location_scale(iris, NoiseParams.fixed(1.0, 0.2))
    assert loc.tolist() == [1.0] * 4
    assert scale.tolist() == [0.2] * 4


def test_rauschen_delta_statistik(iris):
    privat = privatize(iris, NoiseParams.fixed(2.0, 0.0))
    tabelle = noise_delta_stats(iris, privat)
    assert list(tabelle.index) == list(iris.attribute_names) + ['gesamt']
    assert tabelle['mean'].to_numpy() == pytest.approx(2.0)
    assert tabelle['std'].to_numpy() == pytest.approx(0.0, abs=1e-12)


def test_modi_konstanten():
    assert NoiseParams().mode == FIXED
    assert NoiseParams.attribute_scaled().to_dict() == {
        'mode': ATTRIBUTE_SCALED, 'mean': 1.0, 'std': 1.0, 'seed': 0,
    }
