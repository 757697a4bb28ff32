import json
import math

import numpy as np
import pytest

from eitsim.config import ConfigError, format_config, load_config, parse_grid, parse_text
from eitsim.io import format_value, manifest_path, write_csv, write_manifest

FIG2 = """\
# single atom
n_atoms = 1
g13 = 7.5
g24 = 7.5
omega = 0.8125
gamma31 = 0.325
gamma32 = 0.325
gamma4 = 0.325
delta = 0
big_delta = 0
eps_p = 0.1   # drive
"""


def test_parse_values():
    cfg = parse_text(FIG2)
    assert cfg.params.g13 == 7.5
    assert cfg.params.n_atoms == 1
    assert cfg.params.kappa == 1.0
    assert cfg.options == {}


def test_missing_key_named():
    text = FIG2.replace("g24 = 7.5\n", "")
    with pytest.raises(ConfigError, match="g24"):
        parse_text(text)


def test_unknown_key_has_line_number():
    with pytest.raises(ConfigError, match=r":3: unknown key 'g14'"):
        parse_text("n_atoms = 1\n\ng14 = 2\n")


@pytest.mark.parametrize(
    "line, message",
    [
        ("g13 7.5", "expected 'key = value'"),
        ("g13 = seven", "decimal number"),
        ("n_atoms = 1.5", "integer"),
        ("g13 = 1\ng13 = 2", "duplicate"),
    ],
)
def test_parse_errors(line, message):
    with pytest.raises(ConfigError, match=message):
        parse_text(line)


def test_omega_zero_rejected():
    with pytest.raises(ConfigError, match="omega"):
        parse_text(FIG2.replace("omega = 0.8125", "omega = 0"))


def test_shipped_sample_configs():
    from importlib.resources import files

    cfg = load_config(files("eitsim") / "configs" / "fig2.cfg")
    assert cfg.params.omega == pytest.approx(2.5 * cfg.params.gamma31)
    assert cfg.params.eps_p == 0.1
    cfg3 = load_config(files("eitsim") / "configs" / "fig3.cfg")
    assert cfg3.params.n_atoms == 2 and cfg3.params.eps_p == 0.01


def test_grid():
    assert np.array_equal(parse_grid("-1:1:3"), [-1.0, 0.0, 1.0])
    assert np.array_equal(parse_grid("2:2:1"), [2.0])
    for bad in ("1:2", "1:0:5", "a:b:c", "0:1:0"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_round_trip_is_bit_exact(tmp_path):
    text = FIG2.replace("0.8125", "0.1") + "grid = -3:3:7\n"
    cfg = parse_text(text)
    path = tmp_path / "a.cfg"
    path.write_text(format_config(cfg))
    again = load_config(path)
    assert again.params == cfg.params
    assert again.options == cfg.options
    man = tmp_path / "run.manifest.json"
    write_manifest(man, "steady", cfg.flat(), [], 0.0)
    assert load_config(man).params == cfg.params


def test_format_value():
    assert format_value(math.nan) == "NaN"
    assert format_value(3) == "3"
    assert float(format_value(0.1 + 0.2)) == 0.1 + 0.2
    assert len(format_value(1 / 3).replace("0.", "")) >= 12
    for x in (1e-300, -2.5e17, 123456.789):
        assert float(format_value(x)) == x and "," not in format_value(x)


def test_csv_contract(tmp_path):
    out = tmp_path / "x.csv"
    write_csv([], out, ["a", "b"])
    assert out.read_bytes() == b"a,b\n"
    write_csv([{"a": 1, "b": math.nan}, {"a": 2.5, "b": "x,y"}], out, ["a", "b"])
    assert out.read_bytes() == b'a,b\n1,NaN\n2.5,"x,y"\n'


def test_csv_io_error_names_path(tmp_path):
    bad = tmp_path / "missing" / "x.csv"
    with pytest.raises(OSError, match="missing"):
        write_csv([], bad, ["a"])


def test_manifest(tmp_path):
    assert manifest_path("out/sweep.csv").name == "sweep.manifest.json"
    path = tmp_path / "m.json"
    write_manifest(path, "spectra", {"g13": 0.1}, ["s.csv"], 1.5, {"eps": 1 - 2j})
    record = json.loads(path.read_text())
    assert record["command"] == "spectra"
    assert record["config"]["g13"] == 0.1
    assert record["results"]["eps"] == [1.0, -2.0]
    assert {"version", "wall_time_s", "outputs"} <= set(record)
