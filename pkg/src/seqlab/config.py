"""Run configuration: INI file with sections, validated keys, CLI overrides.

Every experiment is expressible as a config file; command-line ``--set
section.key=value`` overrides win over file values.  Unknown sections or
keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from typing import Optional

from .active import ALConfig
from .errors import ConfigError
from .features import FeatureConfig, make_config
from .perceptron import TrainerConfig

# section -> key -> (type, default)
SCHEMA = {
    "data": {
        "train": (str, None),
        "test": (str, None),
        "column_map": (str, "0:surface,1:pos,2:gold"),
        "outside": (str, "O"),
    },
    "model": {
        "profile": (str, "est"),
        "markov_order": (int, 1),
        "suffix_lengths": (str, "2,3"),
        "prefix_lengths": (str, "2,3"),
    },
    "train": {
        "max_epochs": (int, 100),
        "error_threshold": (float, 1e-10),
        "shuffle_seed": (int, 0),
    },
    "ensemble": {
        "k": (int, 5),
        "sample_rate": (float, 0.8),
        "nbest": (int, 3),
        "seed": (int, 0),
    },
    "active": {
        "initial_seed_count": (int, 5),
        "batch_size": (int, 1),
        "rounds": (int, 10),
        "decoder": (str, "vt"),
        "reweight": (str, "rw"),
        "selection": (str, "utl"),
        "seed": (int, 0),
        "literal_decay": (bool, False),
    },
    "serve": {
        "host": (str, "127.0.0.1"),
        "port": (int, 8000),
        "state_file": (str, "session_state.json"),
    },
}

_BOOL = {"true": True, "false": False, "1": True, "0": False,
         "yes": True, "no": False}


@dataclass
class RunConfig:
    values: dict[str, dict[str, object]] = field(default_factory=dict)

    def get(self, section: str, key: str):
        return self.values[section][key]

    # -- derived objects ---------------------------------------------------

    def column_map(self) -> dict[int, str]:
        out = {}
        for part in str(self.get("data", "column_map")).split(","):
            idx, _, name = part.partition(":")
            out[int(idx)] = name
        return out

    def feature_config(self) -> FeatureConfig:
        lengths = lambda s: tuple(int(x) for x in str(s).split(","))
        return make_config(self.get("model", "profile"),
                           lengths(self.get("model", "suffix_lengths")),
                           lengths(self.get("model", "prefix_lengths")))

    def trainer_config(self) -> TrainerConfig:
        return TrainerConfig(
            max_epochs=self.get("train", "max_epochs"),
            error_threshold=self.get("train", "error_threshold"),
            shuffle_seed=self.get("train", "shuffle_seed"),
            markov_order=self.get("model", "markov_order"))

    def al_config(self, decoder=None, reweight=None, selection=None,
                  seed=None) -> ALConfig:
        return ALConfig(
            features=self.feature_config(),
            trainer=self.trainer_config(),
            initial_seed_count=self.get("active", "initial_seed_count"),
            batch_size=self.get("active", "batch_size"),
            rounds=self.get("active", "rounds"),
            sample_rate=self.get("ensemble", "sample_rate"),
            nbest=self.get("ensemble", "nbest"),
            ensemble_size=self.get("ensemble", "k"),
            decoder=decoder or self.get("active", "decoder"),
            reweight_mode=reweight or self.get("active", "reweight"),
            selection=selection or self.get("active", "selection"),
            seed=self.get("active", "seed") if seed is None else seed,
            literal_decay=self.get("active", "literal_decay"))


def _convert(section: str, key: str, raw: str):
    typ, _ = SCHEMA[section][key]
    if typ is bool:
        try:
            return _BOOL[raw.strip().lower()]
        except KeyError:
            raise ConfigError(f"{section}.{key}: not a boolean: {raw!r}") from None
    try:
        return typ(raw)
    except ValueError:
        raise ConfigError(
            f"{section}.{key}: expected {typ.__name__}, got {raw!r}") from None


def load_config(path: Optional[str] = None,
                overrides: Optional[list[str]] = None) -> RunConfig:
    """Build a RunConfig from defaults, an optional INI file, and
    ``section.key=value`` override strings."""
    values = {sec: {k: default for k, (_, default) in keys.items()}
              for sec, keys in SCHEMA.items()}
    if path is not None:
        parser = configparser.ConfigParser()
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file not found: {path}")
        for section in parser.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in SCHEMA[section]:
                    raise ConfigError(f"unknown config key {section}.{key}")
                values[section][key] = _convert(section, key, raw)
    for item in overrides or []:
        target, _, raw = item.partition("=")
        if not _ or "." not in target:
            raise ConfigError(f"override must be section.key=value: {item!r}")
        section, _, key = target.partition(".")
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown config key {section}.{key}")
        values[section][key] = _convert(section, key, raw)
    return RunConfig(values)
