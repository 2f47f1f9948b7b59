"""Recovery of sparse eigenfunction expansions from generalized samples.

Thin convenience layer over the compiled `_gop` module: configs and reports
cross the boundary as JSON, so the helpers here accept and return plain
dictionaries.
"""

import json as _json

try:
    from . import _gop as _core
except ImportError:  # running against a build tree on PYTHONPATH
    import _gop as _core

EigenFamily = _core.EigenFamily
RealPoly = _core.RealPoly
SparseExpansion = _core.SparseExpansion
GopError = _core.GopError
singular_values = _core.singular_values
estimate_order = _core.estimate_order
read_measurements_csv = _core.read_measurements_csv
write_measurements_csv = _core.write_measurements_csv

__version__ = _core.__version__
REPORT_SCHEMA_VERSION = _core.report_schema_version

__all__ = [
    "EigenFamily",
    "RealPoly",
    "SparseExpansion",
    "GopError",
    "singular_values",
    "estimate_order",
    "read_measurements_csv",
    "write_measurements_csv",
    "run",
    "simulate",
    "recover",
    "scheme_info",
    "REPORT_SCHEMA_VERSION",
    "__version__",
]


def _as_text(config):
    if isinstance(config, str):
        return config
    return _json.dumps(config)


def run(config, seed=None):
    """Full recovery run; returns the report as a dictionary.

    `config` is a config dictionary or JSON string. A failed run is still a
    report: check `report["status"]`.
    """
    return _json.loads(_core.run_config(_as_text(config), seed))


def simulate(config, out_csv, seed=None):
    """Write the config's simulated measurements to CSV; returns the report."""
    return _json.loads(_core.simulate_config(_as_text(config), str(out_csv), seed))


def recover(config, values):
    """Recover from explicit measurement values keyed by measurement id."""
    return _json.loads(_core.recover_values(_as_text(config), dict(values)))


def scheme_info(config):
    """Validate the config's sampling scheme and describe its measurements."""
    return _json.loads(_core.scheme_info(_as_text(config)))
