"""Shared JSON configuration schema for specs and domains.

A configuration document is a single JSON object with top-level keys among
{"link", "transform", "domain", "experiment"}; unknown keys are rejected by
name, everywhere.
"""

from __future__ import annotations

import json

from .errors import ConfigError
from .links import LinkSpec, ScoreDomain
from .transforms import TransformSpec

TOP_LEVEL_KEYS = ("link", "transform", "domain", "experiment")


def load_document(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read spec file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"spec file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("configuration document must be a JSON object")
    return doc


def _check_keys(mapping: dict, allowed, where: str) -> None:
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def link_from_mapping(mapping: dict) -> LinkSpec:
    _check_keys(mapping, ("family", "alpha", "beta", "extra"), "link")
    if "family" not in mapping:
        raise ConfigError("link requires a 'family' key")
    try:
        return LinkSpec(
            family=mapping["family"],
            alpha=float(mapping.get("alpha", 1.0)),
            beta=float(mapping.get("beta", 0.0)),
            extra=mapping.get("extra", {}),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid link: {exc}") from exc


def transform_from_mapping(mapping: dict) -> TransformSpec:
    _check_keys(mapping, ("family", "alpha", "beta", "gamma", "extra"), "transform")
    if "family" not in mapping:
        raise ConfigError("transform requires a 'family' key")
    try:
        return TransformSpec(
            family=mapping["family"],
            alpha=float(mapping.get("alpha", 1.0)),
            beta=float(mapping.get("beta", 0.0)),
            gamma=float(mapping.get("gamma", 1.0)),
            extra=mapping.get("extra", {}),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid transform: {exc}") from exc


def domain_from_mapping(mapping: dict) -> ScoreDomain:
    _check_keys(mapping, ("s_min", "s_max", "grid_points"), "domain")
    try:
        return ScoreDomain(
            s_min=float(mapping["s_min"]),
            s_max=float(mapping["s_max"]),
            grid_points=int(mapping.get("grid_points", 4096)),
        )
    except KeyError as exc:
        raise ConfigError(f"domain requires key {exc}") from exc
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid domain: {exc}") from exc


def spec_from_document(doc: dict):
    """The link or transform described by a configuration document."""
    _check_keys(doc, TOP_LEVEL_KEYS, "configuration document")
    has_link, has_transform = "link" in doc, "transform" in doc
    if has_link == has_transform:
        raise ConfigError("document must contain exactly one of 'link' or 'transform'")
    if has_link:
        return link_from_mapping(doc["link"])
    return transform_from_mapping(doc["transform"])


def domain_from_document(doc: dict, default: ScoreDomain | None = None) -> ScoreDomain:
    _check_keys(doc, TOP_LEVEL_KEYS, "configuration document")
    if "domain" in doc:
        return domain_from_mapping(doc["domain"])
    return default or ScoreDomain(-5.0, 5.0)


def spec_to_mapping(spec) -> dict:
    if isinstance(spec, LinkSpec):
        out = {"family": spec.family, "alpha": spec.alpha, "beta": spec.beta}
        if spec.extra:
            out["extra"] = {k: list(v) if isinstance(v, tuple) else v
                            for k, v in spec.extra.items()}
        return {"link": out}
    if isinstance(spec, TransformSpec):
        out = {"family": spec.family, "alpha": spec.alpha, "beta": spec.beta,
               "gamma": spec.gamma}
        if spec.extra:
            out["extra"] = dict(spec.extra)
        return {"transform": out}
    raise TypeError(f"cannot serialize {type(spec).__name__}")
