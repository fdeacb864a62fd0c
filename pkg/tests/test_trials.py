import math

import numpy as np
import pytest

from mmgtune import trials as td
from mmgtune.exceptions import MissingManeuver, ParseError, TrialValidationError
from mmgtune.mmg import MmgParams, ShipParticulars

SHIP = ShipParticulars()


def write_csv(path, rows, units="mariner", T=None):
    header = [f"# format: {td.TRIAL_FORMAT}", "# ship: test", "# maneuver: turn+10", "# dt: 1.0",
              f"# T: {T if T is not None else len(rows)}", f"# units: {units}", td.column_header(units)]
    path.write_text("\n".join(header + rows) + "\n")


@pytest.fixture(scope="module")
def suite():
    return td.generate_suite(MmgParams(), SHIP, td.NoiseModel(), seed=3, specs=td.paper_suite(duration=60))


def test_heading_unwrapped_on_load(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["0,0,359.9,3,0,0,106,0", "1,0,0.1,3,0,0,106,0"])
    trial = td.load_trial(p)
    assert trial.data[:, 2] == pytest.approx([math.radians(359.9), math.radians(360.1)])
    assert trial.data[0, 2] == pytest.approx(6.2814, abs=1e-4)
    assert trial.data[1, 2] == pytest.approx(6.2849, abs=1e-4)


def test_rpm_converted_to_rev_per_second(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["0,0,0,3,0,0,106,0", "3,0,0,3,0,0,106,0"])
    assert td.load_trial(p).data[0, 6] == pytest.approx(106 / 60, rel=1e-15)
    assert td.load_trial(p).data[0, 6] == pytest.approx(1.7667, abs=1e-4)


def test_malformed_row_names_line(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["0,0,0,3,0,0,106,0", "1,0,0,3,0,0,106"])
    with pytest.raises(ParseError) as err:
        td.load_trial(p)
    assert err.value.line == 9
    assert "9" in str(err.value)


@pytest.mark.parametrize("rows,T,error", [
    (["0,0,0,3,0,0,106,x", "1,0,0,3,0,0,106,0"], None, ParseError),
    (["0,0,0,3,0,0,106,0", "1,0,0,3,0,0,106,0"], 5, TrialValidationError),
])
def test_bad_values_or_row_count_rejected(tmp_path, rows, T, error):
    p = tmp_path / "t.csv"
    write_csv(p, rows, T=T)
    with pytest.raises(error):
        td.load_trial(p)


def test_units_header_mismatch_rejected(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["0,0,0,3,0,0,106,0", "1,0,0,3,0,0,106,0"])
    p.write_text(p.read_text().replace("# units: mariner", "# units: si"))
    with pytest.raises(ParseError):
        td.load_trial(p)


def test_non_forward_rows_rejected(tmp_path):
    p = tmp_path / "t.csv"
    write_csv(p, ["0,0,0,3,0,0,106,0", "1,0,0,-3,0,0,106,0"])
    with pytest.raises(TrialValidationError):
        td.load_trial(p)


@pytest.mark.parametrize("units", ["mariner", "si"])
def test_save_load_round_trip(tmp_path, suite, units):
    for trial in suite:
        path = tmp_path / f"{trial.label}.csv"
        td.save_trial(trial, path, units=units)
        back = td.load_trial(path)
        assert back.label == trial.label and back.dt == trial.dt
        assert np.allclose(back.data, trial.data, rtol=1e-15, atol=1e-13)


def test_generation_is_byte_reproducible(tmp_path):
    for name in ("a", "b"):
        trials = td.generate_suite(MmgParams(), SHIP, td.NoiseModel(), seed=9,
                                   specs=td.paper_suite(duration=30))
        for t in trials:
            td.save_trial(t, tmp_path / f"{name}_{t.label}.csv")
    for t in td.paper_suite():
        assert (tmp_path / f"a_{t.label}.csv").read_bytes() == (tmp_path / f"b_{t.label}.csv").read_bytes()


def test_noise_seeds_differ_between_trials(suite):
    clean = td.generate_synthetic_trial(MmgParams(), td.ManeuverSpec(10, duration=60), SHIP)
    noisy = [t for t in suite if t.label == "turn+10"][0]
    assert not np.array_equal(clean.data, noisy.data)
    assert np.array_equal(clean.controls, noisy.controls)


def test_maneuver_controls_ramp_then_hold():
    c = td.ManeuverSpec(-35).controls(1.0)
    assert c.shape == (601, 2)
    assert c[0, 1] == 0.0
    assert c[1, 1] == pytest.approx(-math.radians(2.34))
    assert c[-1, 1] == pytest.approx(-math.radians(35))
    assert np.all(c[:, 0] == 106 / 60)


def test_default_split_assignment(suite):
    split = td.make_split(suite)
    assert [t.label for t in split.tune] == ["turn+10", "turn-20", "turn+35", "turn-40"]
    assert [t.label for t in split.test] == ["turn-10", "turn+20", "turn-35", "turn+40"]


def test_custom_split_rules(suite):
    with pytest.raises(ValueError):
        td.make_split(suite, "custom", ["turn+10"], ["turn+10"])
    one = td.make_split(suite, "custom", ["turn+10"], [])
    assert one.tune_only
    with pytest.raises(MissingManeuver):
        td.make_split(suite[:3])


def test_manifest_round_trip(tmp_path, suite):
    files = {}
    for t in suite:
        files[t.label] = tmp_path / f"{t.label}.csv"
        td.save_trial(t, files[t.label])
    td.save_manifest(tmp_path / "manifest.json", files, td.make_split(suite))
    loaded, split = td.load_manifest(tmp_path / "manifest.json")
    assert set(loaded) == {t.label for t in suite}
    assert [t.label for t in split.test] == list(td.PAPER_TEST_LABELS)


def test_manifest_unknown_key_rejected(tmp_path):
    (tmp_path / "m.json").write_text('{"schema": "mmgtune-manifest/1", "trials": {}, "extra": 1}')
    with pytest.raises(ParseError):
        td.load_manifest(tmp_path / "m.json")
