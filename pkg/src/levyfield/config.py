"""Experiment configuration: YAML schema, strict validation, construction.

Configs are YAML mappings with a ``schema`` version, a mandatory ``seed``, a
characteristics block (preset or explicit triple), a sampler block, and an
ordered task list.  Unknown keys anywhere are rejected with a dotted field
path, and every error carries the path of the offending field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import yaml

from .characteristics import Characteristics
from .funcs import (GaussianFunction, IndicatorFunction, PolynomialDecay,
                    ProductBump, SimpleFunction)
from .presets import PRESET_NAMES, preset
from .regions import Region
from .sampler import SamplerConfig
from .verify import OnbCounterexampleSpec

SCHEMA_VERSION = 1

TASK_KINDS = ("sample", "integrate", "sheet", "verify-cf",
              "verify-independence", "verify-duality", "check-integrability",
              "check-tempered", "classify-besov", "counterexample")


class ConfigError(ValueError):
    """Schema violation, annotated with the dotted path of the field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class ExperimentConfig:
    schema: int
    seed: int
    output: str
    raw: dict
    characteristics: Characteristics
    sampler: SamplerConfig
    tasks: tuple[dict, ...]


# --------------------------------------------------------------------------
# Field helpers
# --------------------------------------------------------------------------

def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, "expected a mapping")
    return dict(value)


def _pop(data: dict, key: str, path: str, check, what: str,
         required: bool = False, default=None):
    if key not in data:
        if required:
            raise ConfigError(f"{path}.{key}", "required field is missing")
        return default
    value = data.pop(key)
    if not check(value):
        raise ConfigError(f"{path}.{key}", f"expected {what}, got {value!r}")
    return value


def _finish(data: dict, path: str) -> None:
    if data:
        keys = ", ".join(sorted(str(k) for k in data))
        raise ConfigError(path, f"unknown keys: {keys}")


def _region_from_spans(value, path: str, dim: int | None = None) -> Region:
    if (not isinstance(value, list) or not value
            or not all(isinstance(s, list) and len(s) == 2
                       and all(_is_num(c) for c in s) for s in value)):
        raise ConfigError(path, "expected a list of [lo, hi] pairs, one per axis")
    if dim is not None and len(value) != dim:
        raise ConfigError(path, f"expected {dim} axis spans, got {len(value)}")
    try:
        return Region.from_intervals([(float(a), float(b)) for a, b in value])
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def function_from_config(value, path: str, dim: int):
    data = _mapping(value, path)
    kind = _pop(data, "type", path, lambda v: isinstance(v, str), "a string",
                required=True)
    if kind == "indicator":
        region = _region_from_spans(
            _pop(data, "region", path, lambda v: True, "", required=True),
            f"{path}.region", dim)
        _finish(data, path)
        return IndicatorFunction(region)
    if kind == "bump":
        center = _pop(data, "center", path,
                      lambda v: isinstance(v, list) and all(_is_num(c) for c in v),
                      "a list of numbers", required=True)
        radius = _pop(data, "radius", path,
                      lambda v: _is_num(v) or (isinstance(v, list)
                                               and all(_is_num(c) for c in v)),
                      "a number or list of numbers", required=True)
        smooth = _pop(data, "smoothness", path,
                      lambda v: v is None or _is_int(v), "an integer or null")
        _finish(data, path)
        if len(center) != dim:
            raise ConfigError(f"{path}.center", f"expected {dim} coordinates")
        try:
            return ProductBump(center, radius, smooth)
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from None
    if kind == "gaussian":
        center = _pop(data, "center", path,
                      lambda v: isinstance(v, list) and all(_is_num(c) for c in v),
                      "a list of numbers", required=True)
        scale = _pop(data, "scale", path, _is_num, "a number", required=True)
        _finish(data, path)
        if len(center) != dim:
            raise ConfigError(f"{path}.center", f"expected {dim} coordinates")
        return GaussianFunction(center, scale)
    if kind == "decay":
        r = _pop(data, "r", path, _is_num, "a number", required=True)
        _finish(data, path)
        return PolynomialDecay(r, dim)
    if kind == "simple":
        terms = _pop(data, "terms", path, lambda v: isinstance(v, list) and v,
                     "a nonempty list", required=True)
        _finish(data, path)
        built = []
        for i, term in enumerate(terms):
            tpath = f"{path}.terms[{i}]"
            tdata = _mapping(term, tpath)
            coef = _pop(tdata, "coef", tpath, _is_num, "a number", required=True)
            region = _region_from_spans(
                _pop(tdata, "region", tpath, lambda v: True, "", required=True),
                f"{tpath}.region", dim)
            _finish(tdata, tpath)
            built.append((float(coef), region))
        try:
            return SimpleFunction(tuple(built))
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from None
    raise ConfigError(f"{path}.type", f"unknown function type {kind!r}")


# --------------------------------------------------------------------------
# Blocks
# --------------------------------------------------------------------------

def _parse_characteristics(value, path: str) -> Characteristics:
    data = _mapping(value, path)
    if "preset" in data:
        name = _pop(data, "preset", path, lambda v: isinstance(v, str),
                    "a string", required=True)
        params = _mapping(_pop(data, "params", path,
                               lambda v: isinstance(v, dict), "a mapping",
                               default={}), f"{path}.params")
        _finish(data, path)
        if name not in PRESET_NAMES:
            raise ConfigError(f"{path}.preset",
                              f"unknown preset {name!r}; known: {', '.join(PRESET_NAMES)}")
        try:
            return preset(name, **params)
        except KeyError as exc:
            raise ConfigError(f"{path}.params",
                              f"missing required parameter {exc}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}.params", str(exc)) from None
    try:
        return Characteristics.from_config(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(path, f"invalid explicit characteristics: {exc}") from None


def _parse_sampler(value, path: str, seed: int, dim: int) -> SamplerConfig:
    data = _mapping(value, path)
    window = _region_from_spans(
        _pop(data, "window", path, lambda v: True, "", required=True),
        f"{path}.window", dim)
    horizon = _pop(data, "horizon", path, _is_num, "a number", default=1.0)
    eps = _pop(data, "eps", path, _is_num, "a number", default=1e-3)
    mode = _pop(data, "small_jump_mode", path, lambda v: isinstance(v, str),
                "a string", default="drop-with-bound")
    reps = _pop(data, "replicates", path, _is_int, "an integer", default=1)
    _finish(data, path)
    try:
        return SamplerConfig(seed=seed, window=window, horizon=float(horizon),
                             eps=float(eps), small_jump_mode=mode,
                             replicates=int(reps))
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _parse_task(value, path: str, chars: Characteristics,
                sampler: SamplerConfig) -> dict:
    data = _mapping(value, path)
    kind = _pop(data, "kind", path, lambda v: isinstance(v, str), "a string",
                required=True)
    if kind not in TASK_KINDS:
        raise ConfigError(f"{path}.kind",
                          f"unknown task kind {kind!r}; known: {', '.join(TASK_KINDS)}")
    dim = chars.dim
    task: dict = {"kind": kind}
    if kind == "sample":
        task["replicates"] = _pop(data, "replicates", path, _is_int,
                                  "an integer", default=1)
        formats = _pop(data, "formats", path,
                       lambda v: isinstance(v, list)
                       and all(f in ("jsonl", "frames") for f in v),
                       "a list drawn from [jsonl, frames]", default=["jsonl"])
        task["formats"] = tuple(formats)
        if task["replicates"] < 1:
            raise ConfigError(f"{path}.replicates", "must be >= 1")
    elif kind == "integrate":
        task["function"] = function_from_config(
            _pop(data, "function", path, lambda v: True, "", required=True),
            f"{path}.function", dim)
        task["t"] = float(_pop(data, "t", path, _is_num, "a number",
                               default=sampler.horizon))
    elif kind == "sheet":
        task["t"] = float(_pop(data, "t", path, _is_num, "a number",
                               default=sampler.horizon))
        axes_cfg = _pop(data, "axes", path,
                        lambda v: isinstance(v, list) and len(v) == dim,
                        f"a list of {dim} axis specs", required=True)
        axes = []
        for i, spec in enumerate(axes_cfg):
            apath = f"{path}.axes[{i}]"
            if isinstance(spec, list):
                if not spec or not all(_is_num(c) for c in spec):
                    raise ConfigError(apath, "expected a nonempty list of numbers")
                axes.append([float(c) for c in spec])
            else:
                sdata = _mapping(spec, apath)
                lo = _pop(sdata, "lo", apath, _is_num, "a number", required=True)
                hi = _pop(sdata, "hi", apath, _is_num, "a number", required=True)
                count = _pop(sdata, "n", apath, _is_int, "an integer", required=True)
                _finish(sdata, apath)
                if not lo < hi or count < 1:
                    raise ConfigError(apath, "need lo < hi and n >= 1")
                step = (hi - lo) / count
                axes.append([lo + step * (j + 1) for j in range(count)])
        task["axes"] = axes
    elif kind == "verify-cf":
        task["u"] = _pop(data, "u", path,
                         lambda v: isinstance(v, list) and v
                         and all(_is_num(c) for c in v),
                         "a nonempty list of numbers", required=True)
        task["n"] = _pop(data, "n", path, _is_int, "an integer", required=True)
        if task["n"] < 1000:
            raise ConfigError(f"{path}.n", "cf test needs n >= 1000")
        if "function" in data:
            task["function"] = function_from_config(
                data.pop("function"), f"{path}.function", dim)
        elif "region" in data:
            task["function"] = IndicatorFunction(_region_from_spans(
                data.pop("region"), f"{path}.region", dim))
        else:
            raise ConfigError(path, "needs either 'function' or 'region'")
    elif kind == "verify-independence":
        task["region_a"] = _region_from_spans(
            _pop(data, "region_a", path, lambda v: True, "", required=True),
            f"{path}.region_a", dim)
        task["region_b"] = _region_from_spans(
            _pop(data, "region_b", path, lambda v: True, "", required=True),
            f"{path}.region_b", dim)
        task["n"] = _pop(data, "n", path, _is_int, "an integer", default=2000)
        task["level"] = float(_pop(data, "level", path, _is_num, "a number",
                                   default=0.01))
        task["permutations"] = _pop(data, "permutations", path, _is_int,
                                    "an integer", default=200)
        if task["n"] < 100:
            raise ConfigError(f"{path}.n", "independence test needs n >= 100")
    elif kind == "verify-duality":
        task["function"] = function_from_config(
            _pop(data, "function", path, lambda v: True, "", required=True),
            f"{path}.function", dim)
        task["t"] = float(_pop(data, "t", path, _is_num, "a number",
                               default=sampler.horizon))
        task["h"] = float(_pop(data, "h", path, _is_num, "a number",
                               required=True))
        task["tolerance"] = float(_pop(data, "tolerance", path, _is_num,
                                       "a number", default=1e-6))
        if task["h"] <= 0 or task["tolerance"] <= 0:
            raise ConfigError(path, "h and tolerance must be positive")
    elif kind == "check-integrability":
        task["function"] = function_from_config(
            _pop(data, "function", path, lambda v: True, "", required=True),
            f"{path}.function", dim)
    elif kind == "check-tempered":
        task["r_max"] = float(_pop(data, "r_max", path, _is_num, "a number",
                                   default=64.0))
    elif kind == "classify-besov":
        p_raw = _pop(data, "p", path,
                     lambda v: _is_num(v) or v in ("inf", "infinity"),
                     "a number or 'inf'", required=True)
        task["p"] = math.inf if isinstance(p_raw, str) else float(p_raw)
        task["tau"] = float(_pop(data, "tau", path, _is_num, "a number",
                                 required=True))
        task["rho_growth"] = float(_pop(data, "rho_growth", path, _is_num,
                                        "a number", required=True))
        alpha = _pop(data, "alpha", path, _is_num, "a number")
        if alpha is None:
            kern = chars.nu.kernel if chars.nu is not None else None
            alpha = getattr(kern, "alpha", None)
            if alpha is None:
                raise ConfigError(f"{path}.alpha",
                                  "required unless the kernel has a stability index")
        task["alpha"] = float(alpha)
    elif kind == "counterexample":
        task["n"] = _pop(data, "n", path, _is_int, "an integer", default=10_000)
        task["level"] = float(_pop(data, "level", path, _is_num, "a number",
                                   default=0.01))
        spec_kwargs = {}
        trunc = _pop(data, "truncation", path, _is_int, "an integer")
        if trunc is not None:
            spec_kwargs["truncation"] = trunc
        for key in ("set_a", "set_b"):
            spans = _pop(data, key, path,
                         lambda v: isinstance(v, list) and len(v) == 2
                         and all(_is_num(c) for c in v),
                         "a [lo, hi] pair")
            if spans is not None:
                spec_kwargs[key] = (float(spans[0]), float(spans[1]))
        shared = _pop(data, "shared", path, lambda v: isinstance(v, bool),
                      "a boolean")
        if shared is not None:
            spec_kwargs["shared"] = shared
        try:
            task["spec"] = OnbCounterexampleSpec(**spec_kwargs)
        except ValueError as exc:
            raise ConfigError(path, str(exc)) from None
        if task["n"] < 100:
            raise ConfigError(f"{path}.n", "counterexample needs n >= 100")
    _finish(data, path)
    return task


# --------------------------------------------------------------------------
# Entry points
# --------------------------------------------------------------------------

def parse_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<config>", "top level must be a mapping")
    data = dict(raw)
    schema = _pop(data, "schema", "<config>", _is_int, "an integer",
                  required=True)
    if schema != SCHEMA_VERSION:
        raise ConfigError("<config>.schema",
                          f"unsupported schema version {schema}; this build "
                          f"reads version {SCHEMA_VERSION}")
    seed = _pop(data, "seed", "<config>", _is_int, "an integer", required=True)
    output = _pop(data, "output", "<config>",
                  lambda v: isinstance(v, str) and v, "a nonempty string",
                  default="out")
    chars = _parse_characteristics(
        _pop(data, "characteristics", "<config>", lambda v: True, "",
             required=True), "characteristics")
    sampler = _parse_sampler(
        _pop(data, "sampler", "<config>", lambda v: True, "", required=True),
        "sampler", seed, chars.dim)
    tasks_raw = _pop(data, "tasks", "<config>",
                     lambda v: isinstance(v, list), "a list", default=[])
    _finish(data, "<config>")
    tasks = tuple(_parse_task(t, f"tasks[{i}]", chars, sampler)
                  for i, t in enumerate(tasks_raw))
    return ExperimentConfig(schema=schema, seed=seed, output=output, raw=raw,
                            characteristics=chars, sampler=sampler, tasks=tasks)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as handle:
            raw = yaml.safe_load(handle)
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"invalid YAML: {exc}") from None
    return parse_config(raw)
