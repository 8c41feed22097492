"""YAML configuration files describing a chart and the test-suite settings.

Schema (all polynomial payloads use the scalar grammar, forms and Weyl
elements the ``coeff * dx.. @ dx..&dx..`` text form)::

    name: curved2d                 # optional label
    dim: 2                         # positive even integer
    omega: [["0", "1"], ["-1", "0"]]   # constant matrix omega_ij
    gamma:                         # Christoffel symbols Gamma^k_ij (1-based)
      - {k: 2, i: 1, j: 1, value: "x2"}
    Omega: {1: "(1 + x2) @ dx1&dx2"}   # nu^i Omega_i
    s: "nu * x1 * dx2"             # normalisation element
    cap: 6                         # total-degree truncation N
    potentials:                    # named choices; "auto" = radial homotopy
      A: auto
      B: {theta: "...", Theta: {1: "..."}}
    seed: 20240601
    sizes: {pairs: 20, triples: 20, functions: 20, generator_degree: 3}

Every listed Gamma entry sets exactly that index triple, so a torsion-free
connection must list both ``(k, i, j)`` and ``(k, j, i)`` when ``i != j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

import yaml

from .euler import PotentialChoice, check_potential
from .fedosov import ChartData, ValidationReport, validate_chart

__all__ = ["ConfigError", "Config", "load_config", "config_from_dict", "fixture_path", "FIXTURES"]

FIXTURES = ("flat2d", "curved2d")

DEFAULT_SIZES = {"pairs": 20, "triples": 20, "functions": 20, "generator_degree": 3}


class ConfigError(ValueError):
    """Schema violation or failed chart validation.

    Attributes
    ----------
    field : str
        Offending field (``"chart"`` for validation failures).
    report : ValidationReport or None
        The forwarded validation report, if any.
    """

    def __init__(self, field: str, reason: str, report: Optional[ValidationReport] = None):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason
        self.report = report


@dataclass
class Config:
    name: str
    chart: ChartData
    potentials: Dict[str, PotentialChoice]
    seed: int = 0
    sizes: Dict[str, int] = field(default_factory=lambda: dict(DEFAULT_SIZES))
    raw: Dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.chart.dim

    @property
    def cap(self) -> int:
        return self.chart.cap


def fixture_path(name: str) -> Path:
    """Path of a shipped fixture (``flat2d`` or ``curved2d``)."""
    if name not in FIXTURES:
        raise ConfigError("fixture", f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
    return Path(str(resources.files("fedosov") / "fixtures" / f"{name}.yaml"))


def _need(doc: Mapping, key: str, kind, default=None, required: bool = True):
    if key not in doc or doc[key] is None:
        if required:
            raise ConfigError(key, "missing required field")
        return default
    val = doc[key]
    if not isinstance(val, kind):
        names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise ConfigError(key, f"expected {names}, got {type(val).__name__}")
    return val


def _text(v, where: str) -> str:
    if isinstance(v, bool) or not isinstance(v, (str, int)):
        raise ConfigError(where, "expected a polynomial string")
    return str(v)


def config_from_dict(doc: Mapping, validate: bool = True) -> Config:
    """Build and validate a :class:`Config` from a parsed YAML mapping."""
    if not isinstance(doc, Mapping):
        raise ConfigError("<root>", "top level must be a mapping")
    dim = _need(doc, "dim", int)
    if dim <= 0 or dim % 2:
        raise ConfigError("dim", "must be a positive even integer")
    omega = _need(doc, "omega", list)
    if len(omega) != dim or any(not isinstance(r, list) or len(r) != dim for r in omega):
        raise ConfigError("omega", f"expected a {dim}x{dim} matrix")
    omega = [[_text(v, "omega") for v in row] for row in omega]
    gamma = {}
    for n, entry in enumerate(_need(doc, "gamma", list, [], required=False)):
        where = f"gamma[{n}]"
        if not isinstance(entry, Mapping) or set(entry) != {"k", "i", "j", "value"}:
            raise ConfigError(where, "expected {k, i, j, value}")
        idx = (entry["k"], entry["i"], entry["j"])
        if any(not isinstance(v, int) or not 1 <= v <= dim for v in idx):
            raise ConfigError(where, f"indices must be integers in 1..{dim}")
        gamma[idx] = _text(entry["value"], where)
    Omega = {}
    for i, v in (_need(doc, "Omega", dict, {}, required=False)).items():
        if not isinstance(i, int) or i < 1:
            raise ConfigError("Omega", f"keys must be integers >= 1, got {i!r}")
        Omega[i] = _text(v, f"Omega[{i}]")
    s = _text(doc.get("s", "0") or "0", "s")
    cap = _need(doc, "cap", int)
    if cap < 2:
        raise ConfigError("cap", "must be at least 2")
    try:
        chart = ChartData.build(omega, gamma=gamma, Omega=Omega, s=s, cap=cap)
    except ValueError as exc:
        raise ConfigError("chart", str(exc)) from exc
    if validate:
        rep = validate_chart(chart)
        if not rep.ok:
            raise ConfigError("chart", "validation failed: " + "; ".join(n for n, _ in rep.failures()), rep)
    potentials: Dict[str, PotentialChoice] = {}
    for label, entry in (_need(doc, "potentials", dict, {"A": "auto"}, required=False)).items():
        label = str(label)
        try:
            if entry == "auto":
                p = PotentialChoice.auto(chart, label)
            elif isinstance(entry, Mapping) and "theta" in entry:
                Theta = {int(k): _text(v, f"potentials.{label}.Theta")
                         for k, v in (entry.get("Theta") or {}).items()}
                p = PotentialChoice.from_forms(chart, _text(entry["theta"], f"potentials.{label}"),
                                               Theta, label)
            else:
                raise ConfigError(f"potentials.{label}", "expected 'auto' or {theta, Theta}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"potentials.{label}", str(exc)) from exc
        rep = check_potential(chart, p)
        if not rep.ok:
            raise ConfigError(f"potentials.{label}", "; ".join(n for n, _ in rep.failures()), rep)
        potentials[label] = p
    seed = _need(doc, "seed", int, 0, required=False)
    sizes = dict(DEFAULT_SIZES)
    for k, v in (_need(doc, "sizes", dict, {}, required=False)).items():
        if k not in DEFAULT_SIZES:
            raise ConfigError("sizes", f"unknown size {k!r}")
        if not isinstance(v, int) or v < 0:
            raise ConfigError(f"sizes.{k}", "expected a non-negative integer")
        sizes[k] = v
    return Config(str(doc.get("name", "chart")), chart, potentials, seed, sizes, dict(doc))


def load_config(path: Union[str, Path], validate: bool = True) -> Config:
    """Load a YAML config; a bare fixture name (``flat2d``, ``curved2d``) is accepted too.

    Raises
    ------
    ConfigError
        On schema violations or when the chart fails validation.
    """
    p = Path(path)
    if not p.exists() and str(path) in FIXTURES:
        p = fixture_path(str(path))
    try:
        with open(p, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError("path", f"no such file {str(path)!r}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError("path", f"malformed YAML ({exc})") from exc
    return config_from_dict(doc, validate=validate)
