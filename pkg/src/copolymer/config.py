"""Run configuration: a versioned JSON document, validated before compute.

Every experiment is driven by one JSON file holding the renewal-law block,
the disorder block, coupling parameters, an experiment block, and the root
seed.  Validation reports the JSON path of each offending field together
with the line in the file where that field appears, and enforces the
cross-field integrality constraints (eps/a^2, delta/eps, t/eps) up front.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Any

from .models import (DisorderLaw, TailedRenewalLaw, binary_disorder,
                     build_renewal_law, finite_disorder, gaussian_disorder)

SCHEMA_VERSION = 1

EXPERIMENTS = ("free-energy", "hc-curve", "collapse", "pipeline-chain",
               "regenset-sample", "rn-check", "validate")


class ConfigError(ValueError):
    """Invalid run configuration; message carries path and line anchors."""


@dataclass
class RunConfig:
    raw: dict
    path: str
    seed: int
    out: str
    experiment: str
    model_specs: list
    disorder: DisorderLaw
    params: dict
    exp: dict = field(default_factory=dict)

    def build_laws(self) -> list[TailedRenewalLaw]:
        return [build_renewal_law(**spec) for spec in self.model_specs]


def _line_of(text: str, key: str) -> int | None:
    m = re.search(rf'"{re.escape(key)}"\s*:', text)
    if m is None:
        return None
    return text.count("\n", 0, m.start()) + 1


class _Checker:
    def __init__(self, raw: dict, text: str, path: str):
        self.raw = raw
        self.text = text
        self.path = path
        self.errors: list[str] = []

    def fail(self, where: str, msg: str):
        key = where.split(".")[-1]
        line = _line_of(self.text, key)
        anchor = f"{self.path}:{line}" if line else self.path
        self.errors.append(f"{anchor}: {where}: {msg}")

    def need(self, obj: dict, where: str, key: str, types, pred=None,
             msg: str = "invalid value"):
        if key not in obj:
            self.fail(f"{where}.{key}" if where else key, "missing")
            return None
        val = obj[key]
        if not isinstance(val, types) or isinstance(val, bool) and types != bool:
            self.fail(f"{where}.{key}" if where else key,
                      f"expected {types}, got {type(val).__name__}")
            return None
        if pred is not None and not pred(val):
            self.fail(f"{where}.{key}" if where else key, msg)
            return None
        return val


def _check_model(chk: _Checker, spec: dict, where: str) -> dict | None:
    alpha = chk.need(spec, where, "alpha", (int, float),
                     lambda a: 0 < a < 1, "alpha must lie in (0, 1)")
    n_max = chk.need(spec, where, "n_max", int, lambda n: n >= 100,
                     "n_max must be >= 100")
    period = spec.get("period", 1)
    if not isinstance(period, int) or period < 1:
        chk.fail(f"{where}.period", "period must be a positive integer")
        return None
    sv = spec.get("sv", {"kind": "constant", "param": 1.0})
    kind = sv.get("kind") if isinstance(sv, dict) else None
    if kind not in ("constant", "log-power"):
        chk.fail(f"{where}.sv", "sv.kind must be 'constant' or 'log-power'")
        return None
    param = sv.get("param", 1.0)
    if kind == "constant" and not param > 0:
        chk.fail(f"{where}.sv", "constant sv factor must be > 0")
        return None
    if alpha is None or n_max is None:
        return None
    return dict(alpha=float(alpha), sv_spec=(kind, float(param)),
                n_max=int(n_max), period=int(period),
                pin_constant=bool(spec.get("pin_constant", False)),
                name=str(spec.get("name", "")))


def _check_disorder(chk: _Checker, spec: dict) -> DisorderLaw | None:
    kind = spec.get("kind")
    if kind == "gaussian":
        return gaussian_disorder()
    if kind == "binary":
        return binary_disorder()
    if kind == "finite":
        try:
            return finite_disorder(spec.get("values", ()), spec.get("probs", ()))
        except ValueError as exc:
            chk.fail("disorder", str(exc))
            return None
    chk.fail("disorder.kind", "must be 'gaussian', 'binary' or 'finite'")
    return None


def _check_integer_ratio(chk: _Checker, value: float, what: str):
    if abs(value - round(value)) > 1e-9:
        chk.fail("experiment", f"{what} = {value} must be an integer")


def load_config(path: str, seed_override: int | None = None,
                out_override: str | None = None) -> RunConfig:
    """Parse and validate a run configuration file.

    Raises ConfigError with one line-anchored message per violation.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")

    chk = _Checker(raw, text, path)
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        chk.fail("schema_version", f"must be {SCHEMA_VERSION}")

    experiment = raw.get("experiment", {}).get("name") \
        if isinstance(raw.get("experiment"), dict) else None
    if experiment not in EXPERIMENTS:
        chk.fail("experiment.name", f"must be one of {', '.join(EXPERIMENTS)}")

    model_specs = []
    if "models" in raw:
        if not isinstance(raw["models"], list) or not raw["models"]:
            chk.fail("models", "must be a nonempty list of model blocks")
        else:
            for i, spec in enumerate(raw["models"]):
                parsed = _check_model(chk, spec, f"models[{i}]")
                if parsed:
                    model_specs.append(parsed)
    elif "model" in raw:
        parsed = _check_model(chk, raw["model"], "model")
        if parsed:
            model_specs.append(parsed)
    else:
        chk.fail("model", "missing (provide 'model' or 'models')")

    disorder = _check_disorder(chk, raw.get("disorder", {}))

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or seed < 0 or seed >= 2 ** 64:
        chk.fail("seed", "must be an unsigned 64-bit integer")
        seed = 0
    if seed_override is not None:
        seed = seed_override

    params = raw.get("params", {})
    if not isinstance(params, dict):
        chk.fail("params", "must be an object")
        params = {}
    exp = dict(raw.get("experiment", {}))

    # cross-field integrality: checked before any compute
    if experiment == "pipeline-chain":
        a = exp.get("a", 0.0)
        eps = exp.get("eps", 0.0)
        delta = exp.get("delta", 0.0)
        t = exp.get("t", 0.0)
        if min(a, eps, delta, t) <= 0:
            chk.fail("experiment", "pipeline-chain needs positive a, eps, "
                                   "delta, t")
        else:
            _check_integer_ratio(chk, eps / (a * a), "eps/a^2")
            _check_integer_ratio(chk, delta / eps, "delta/eps")
            _check_integer_ratio(chk, t / eps, "t/eps")
    if experiment == "hc-curve":
        lams = exp.get("lambdas", params.get("lambdas", []))
        if any(l == 0 for l in lams):
            # h_c(0) = 0 is degenerate; drop the row rather than divide by 0
            exp["lambdas"] = [l for l in lams if l != 0]

    if chk.errors:
        raise ConfigError("\n".join(chk.errors))

    return RunConfig(raw=raw, path=path, seed=seed,
                     out=out_override or raw.get("out", "results"),
                     experiment=experiment, model_specs=model_specs,
                     disorder=disorder, params=params, exp=exp)
