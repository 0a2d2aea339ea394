import dataclasses

import pytest
from hypothesis import given, settings, strategies as st

from waimforge.config import (dump_problem_config, fingerprint, load_problem_config, parse_problem_config,
                              resolve_config, shipped_configs)
from waimforge.errors import ValidationError

MINIMAL = """
[array]
d1 = 1.575e-3
d2 = 2.2
d3 = 1.185e-2
d4 = 9.06e-3
d5 = 2.298e-3
d6 = 5.925e-3
w1 = [0.015, 0.0]
w2 = [0.0, 0.015]

[scan]
f_min = 10e9
"""


def test_shipped_set():
    assert shipped_configs() == ["example1_square", "example2_triangular", "example3_anisotropic",
                                 "example4_highperm_square", "example4_highperm_triangular", "example5_band"]


@pytest.mark.parametrize("name", ["example1_square", "example5_band", "example3_anisotropic"])
def test_round_trip(name):
    cfg = resolve_config(name)
    again = parse_problem_config(dump_problem_config(cfg))
    assert again == cfg and fingerprint(again) == fingerprint(cfg)


def test_example1_defaults():
    cfg = resolve_config("example1_square.cfg")
    assert cfg.spectral.P == cfg.spectral.Q == 60 and cfg.swarm.R == 10
    assert cfg.array.d2 == 2.2 and cfg.waim.design.L == 2


def test_band_config():
    s = resolve_config("example5_band").scan
    assert (s.f_min, s.f_max) == (9e9, 11e9) and s.n_freq > 1


def test_defaults_fill_in():
    cfg = parse_problem_config(MINIMAL)
    assert cfg.scan.f_max == 10e9 and cfg.scan.n_freq == 1
    assert cfg.waim.design is None and cfg.swarm.K == 200


def test_physical_floor_message():
    with pytest.raises(ValidationError) as ei:
        parse_problem_config(MINIMAL + "\n[waim]\neps_min = 0.5\n")
    assert any("eps_min below physical floor 1" in e for e in ei.value.errors)


def test_missing_lattice_vector_names_field():
    with pytest.raises(ValidationError) as ei:
        parse_problem_config(MINIMAL.replace("w1 = [0.015, 0.0]\n", ""))
    assert any(e.startswith("array.w1") for e in ei.value.errors)


def test_all_errors_reported():
    text = MINIMAL.replace("d2 = 2.2", "d2 = 0.5") + "\n[spectral]\nP = 0\nbogus = 1\n[swarm]\nK = 'x'\n"
    with pytest.raises(ValidationError) as ei:
        parse_problem_config(text)
    errs = " | ".join(ei.value.errors)
    for frag in ("spectral.bogus: unknown key", "swarm.K: expected an integer", "array:", "spectral:"):
        assert frag in errs


def test_parse_error_has_line():
    with pytest.raises(ValidationError) as ei:
        parse_problem_config("[array]\nd1 = = 3\n", "bad.toml")
    assert ei.value.errors[0].startswith("bad.toml:2:")


def test_unreadable_path(tmp_path):
    with pytest.raises(ValidationError):
        load_problem_config(tmp_path / "nope.toml")
    with pytest.raises(ValidationError):
        resolve_config("no_such_config")


def test_design_layers_must_match_count():
    text = MINIMAL + "\n[waim]\nlayers = 2\n[[waim.layer]]\nt = 0.001\neps = 2.0\n"
    with pytest.raises(ValidationError):
        parse_problem_config(text)


def test_infeasible_design_rejected():
    text = MINIMAL + "\n[waim]\nlayers = 1\n[[waim.layer]]\nt = 0.001\neps = 40.0\n"
    with pytest.raises(ValidationError):
        parse_problem_config(text)


_FIELDS = [("array", "d1", 1.6e-3), ("scan", "n_theta", 31), ("spectral", "arl_cap", 2e6),
           ("swarm", "seed", 9), ("spectral", "P", 40)]


@pytest.mark.parametrize("section,key,value", _FIELDS)
def test_fingerprint_tracks_semantic_fields(section, key, value):
    cfg = resolve_config("example1_square")
    changed = dataclasses.replace(cfg, **{section: dataclasses.replace(getattr(cfg, section), **{key: value})})
    assert fingerprint(changed) != fingerprint(cfg)


@settings(max_examples=20)
@given(st.integers(0, 2**31))
def test_fingerprint_stable_under_reload(seed):
    cfg = resolve_config("example1_square").with_seed(seed)
    assert fingerprint(parse_problem_config(dump_problem_config(cfg))) == fingerprint(cfg)
