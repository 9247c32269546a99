"""Contact-network degree analysis: record parsing, distribution fitting,
windowed structure reports and an outbreak simulator."""

import json
from pathlib import Path

from . import _core
from ._core import FitError, ParseError, ValidationError, format_record, hurwitz_zeta, parse_record, read_records, validate

__all__ = [
    "FitError",
    "ParseError",
    "ValidationError",
    "analyze",
    "final_sizes",
    "fit",
    "fit_summary",
    "format_record",
    "hurwitz_zeta",
    "parse_record",
    "plot",
    "read_records",
    "select",
    "simulate",
    "validate",
]


def fit(family, degrees):
    """ML fit of one family ("exponential", "normal", "poisson", "power-law")."""
    return json.loads(_core.fit_json(family, [int(d) for d in degrees]))


def fit_summary(family, n, mean, sd):
    """Closed-form fit from (n, mean, MLE sd) alone."""
    return json.loads(_core.fit_summary_json(family, n, mean, sd))


def select(fits, rule="min-se"):
    """Family name chosen among fit dicts under `rule`."""
    return _core.select_json([json.dumps(f) for f in fits], rule)


def analyze(text, format="csv", window="all", families=(), rule="min-se", include_isolated=False):
    """Structure reports for record text. `window` is "all", "tumbling:<dur>"
    or "cumulative:<dur>". Returns (reports, diagnostics)."""
    mode, _, period = window.partition(":")
    reports, diagnostics = _core.analyze_json(
        text, format, mode, period or "1d", list(families), rule, include_isolated
    )
    return [json.loads(r) for r in reports], diagnostics


def _config_text(config):
    if isinstance(config, (str, Path)) and Path(config).is_file():
        path = Path(config)
        return path.read_text(), str(path.parent)
    if isinstance(config, dict):
        return json.dumps(config), ""
    return str(config), ""


def simulate(config, seed=None):
    """CSV text of a simulated outbreak. `config` is a path, a dict or JSON text."""
    text, base = _config_text(config)
    return _core.simulate(text, base, seed)


def final_sizes(config, p, replications=10):
    """Outbreak fraction per replication at transmission probability p."""
    text, base = _config_text(config)
    return _core.final_sizes(text, base, p, replications)


def plot(report, log_log=False, title=""):
    """SVG document for one report dict."""
    return _core.plot_svg(json.dumps(report), log_log, title)
