import cmath
import math

import numpy as np
import pytest

import gop


def expo_config():
    return {
        "name": "smoke",
        "family": {"kind": "exponential"},
        "order": 2,
        "scheme": {"kind": "shift_hankel", "tau": 0.5, "x0": 0.0},
        "truth": {
            "terms": [
                {"lambda": [-0.4, 0.9], "coeff": 2.0},
                {"lambda": [0.3, -1.1], "coeff": [-1.5, 0.5]},
            ]
        },
    }


def test_run_recovers_truth():
    report = gop.run(expo_config())
    assert report["schema_version"] == gop.REPORT_SCHEMA_VERSION
    assert report["status"] == "ok"
    assert report["truth_comparison"]["max_param_error"] < 1e-8
    assert report["truth_comparison"]["max_coeff_error"] < 1e-8
    assert len(report["recovery"]["params"]) == 2


def test_scheme_info_describes_measurements():
    info = gop.scheme_info(expo_config())
    assert info["rows"] == 2
    assert info["hankel"] is True
    assert info["measurement_count"] == 4
    ids = {m["id"] for m in info["measurements"]}
    assert ids == {"p0@0", "p0@0.5", "p0@1", "p0@1.5"}


def test_bad_config_raises_gop_error():
    with pytest.raises(gop.GopError) as excinfo:
        gop.scheme_info({"order": 2})
    assert "ConfigError" in str(excinfo.value)
    assert "family" in str(excinfo.value)


def test_family_eval_and_eigenvalue_roundtrip():
    family = gop.EigenFamily.exponential()
    lam = complex(-0.3, 0.7)
    assert abs(family.eval(lam, 0.4) - cmath.exp(lam * 0.4)) < 1e-12
    mu = family.operator_eigenvalue(lam)
    assert abs(family.param_from_operator_eigenvalue(mu) - lam) < 1e-12
    assert family.max_iteration_step() == pytest.approx(1.0)

    legendre = gop.EigenFamily.legendre()
    assert legendre.operator_eigenvalue(4.0) == pytest.approx(20.0)


def test_sparse_expansion_eval():
    family = gop.EigenFamily.exponential()
    terms = [(complex(-0.4, 0.9), complex(2.0)), (complex(0.3, -1.1), complex(-1.5, 0.5))]
    f = gop.SparseExpansion(family, terms)
    want = sum(c * cmath.exp(l * 0.7) for l, c in terms)
    assert abs(f.eval(0.7) - want) < 1e-12
    assert f.order() == 2
    assert f.min_separation() > 0.5


def test_recover_from_values():
    terms = [(complex(-0.4, 0.9), complex(2.0)), (complex(0.3, -1.1), complex(-1.5, 0.5))]
    values = {}
    for k in range(4):
        x = 0.5 * k
        values[f"p0@{x:g}"] = sum(c * cmath.exp(l * x) for l, c in terms)
    result = gop.recover(expo_config(), values)
    params = sorted(
        (complex(re, im) for re, im in result["params"]),
        key=lambda z: (z.real, z.imag),
    )
    assert abs(params[0] - complex(-0.4, 0.9)) < 1e-9
    assert abs(params[1] - complex(0.3, -1.1)) < 1e-9
    assert result["residual"] < 1e-10


def test_singular_values_and_order():
    u = np.array([1.0, 2.0, -1.0, 0.5], dtype=complex)
    v = np.array([0.5, -1.0, 2.0, 1.0, 0.25], dtype=complex)
    matrix = np.outer(u, v)
    s = gop.singular_values(matrix)
    assert s[0] == pytest.approx(np.linalg.norm(u) * np.linalg.norm(v))
    assert gop.estimate_order(matrix) == 1


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "values.csv"
    rows = [("p0@0", complex(1.5, -2.0)), ("k1", complex(math.pi, 0.0))]
    gop.write_measurements_csv(str(path), rows)
    values = gop.read_measurements_csv(str(path))
    assert values == dict(rows)


def test_simulate_writes_csv(tmp_path):
    csv = tmp_path / "smoke.csv"
    report = gop.simulate(expo_config(), csv)
    assert report["status"] == "ok"
    assert report["measurement_count"] == 4
    values = gop.read_measurements_csv(str(csv))
    assert len(values) == 4


def test_noise_determinism():
    config = expo_config()
    config["noise"] = {"sigma": 0.01, "seed": 7}
    a = gop.run(config)
    b = gop.run(config)
    a.pop("wall_time_ms")
    b.pop("wall_time_ms")
    assert a == b
    c = gop.run(config, seed=9)
    assert c["noise"]["seed"] == 9
    assert c["recovery"]["params"] != a["recovery"]["params"]
