"""Sectioned key=value scenario files.

Every key is declared in :data:`SCHEMA`; unknown keys, missing required keys
and invalid values are reported with the file line they came from.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from .effort import EffortModel
from .errors import ValidationError
from .insurability import PRICE_POINTS, ChecklistItem, QualityChecklist
from .risk_model import DamageModel, PopulationModel, RiskScenario, UncertaintyModel
from .roc import OperatingPoint, RocModel

REQUIRED = object()


class ConfigError(ValueError):
    pass


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional(conv: Callable[[str], Any]) -> Callable[[str], Any]:
    return lambda text: None if text.strip() in ("", "none") else conv(text)


def _price_point(text: str) -> str:
    if text not in PRICE_POINTS:
        raise ValueError(f"must be one of {', '.join(PRICE_POINTS)}")
    return text


DEFAULT_T_GRID = ",".join(str(0.5 * i) for i in range(25))

# section -> key -> (converter, default)
SCHEMA: dict[str, dict[str, tuple[Callable[[str], Any], Any]]] = {
    "population": {"k": (float, REQUIRED), "n": (int, REQUIRED), "d_doc": (float, REQUIRED)},
    "damages": {
        "alpha": (float, REQUIRED),
        "beta": (float, REQUIRED),
        "w": (float, REQUIRED),
        "t_quarantine": (float, REQUIRED),
        "m_treatment": (float, REQUIRED),
        "r0": (float, REQUIRED),
    },
    "uncertainty": {"v": (float, REQUIRED), "sigma0_sq": (float, REQUIRED), "m": (float, REQUIRED)},
    "roc": {"d_const": (float, REQUIRED), "p_f": (float, REQUIRED), "p_t": (float, REQUIRED)},
    "effort": {
        "c0": (float, REQUIRED),
        "h0": (float, REQUIRED),
        "a_low": (_optional(float), "none"),
        "a_high": (_optional(float), "none"),
    },
    "market": {
        "max_premium": (float, REQUIRED),
        "rho": (float, "1.0"),
        "epsilon": (_optional(float), "none"),
        "price_point": (_price_point, "lower"),
        "agent_wealth": (float, "0"),
        "insurer_wealth": (float, "0"),
    },
    "analysis": {
        "seed": (_optional(int), "none"),
        "t": (float, "0"),
        "t_grid": (_float_list, DEFAULT_T_GRID),
        "resolution": (float, "0.005"),
        "mc_samples": (int, "1000000"),
        "verify_ir": (_bool, "false"),
    },
    "lab": {
        "dimension": (int, "5"),
        "class_separation": (float, "1.0"),
        "class_prior": (float, "0.5"),
        "a_grid": (_float_list, "100,1000,5000"),
        "n_test": (int, "5000"),
        "iterations": (_optional(int), "none"),
        "step_scale": (float, "1.0"),
        "smoothness": (float, "1.0"),
        "batch_size": (int, "1"),
        "n_thresholds": (_optional(int), "none"),
    },
}
FREEFORM_SECTIONS = ("checklist",)


@dataclass
class ScenarioConfig:
    scenario: RiskScenario
    operating_point: OperatingPoint
    values: dict[str, dict[str, Any]]
    effective: dict[str, dict[str, str]]
    checklist: QualityChecklist
    source: str

    def get(self, section: str, key: str) -> Any:
        return self.values[section][key]

    @property
    def seed(self) -> int | None:
        return self.values["analysis"]["seed"]

    def echo_lines(self) -> list[str]:
        """``section.key=value`` for every effective setting, in schema order."""
        lines = []
        for section, keys in self.effective.items():
            for key, val in keys.items():
                lines.append(f"{section}.{key}={val}")
        return lines


def _line_index(text: str) -> dict[tuple[str, str | None], int]:
    index: dict[tuple[str, str | None], int] = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            index[(section, None)] = lineno
            continue
        m = re.match(r"\s*([^#;=\s][^=]*?)\s*=", line)
        if m and section is not None:
            index.setdefault((section, m.group(1).strip()), lineno)
    return index


def parse_overrides(overrides: list[str]) -> list[tuple[str, str, str]]:
    out = []
    for item in overrides:
        m = re.fullmatch(r"([A-Za-z_]\w*)\.([A-Za-z_]\w*)=(.*)", item)
        if not m:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        out.append((m.group(1), m.group(2), m.group(3).strip()))
    return out


def load_config(path: str | Path, overrides: list[str] = ()) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    return parse_config(text, str(path), overrides)


def parse_config(text: str, source: str = "<config>", overrides: list[str] = ()) -> ScenarioConfig:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#",), comment_prefixes=("#",), strict=True
    )
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " ")) from None
    lines = _line_index(text)

    def where(section, key=None):
        lineno = lines.get((section, key)) or lines.get((section, None))
        return f"{source}:{lineno}" if lineno else source

    raw: dict[str, dict[str, str]] = {s: dict(parser[s]) for s in parser.sections()}
    for section, key, value in parse_overrides(list(overrides)):
        raw.setdefault(section, {})[key] = value

    for section in raw:
        if section not in SCHEMA and section not in FREEFORM_SECTIONS:
            raise ConfigError(f"{where(section)}: unknown section [{section}]")
        if section in SCHEMA:
            for key in raw[section]:
                if key not in SCHEMA[section]:
                    raise ConfigError(f"{where(section, key)}: unknown key {section}.{key}")

    values: dict[str, dict[str, Any]] = {}
    effective: dict[str, dict[str, str]] = {}
    for section, keys in SCHEMA.items():
        values[section], effective[section] = {}, {}
        for key, (conv, default) in keys.items():
            text_val = raw.get(section, {}).get(key)
            if text_val is None:
                if default is REQUIRED:
                    raise ConfigError(f"{where(section)}: missing required key {section}.{key}")
                text_val = default
            try:
                values[section][key] = conv(text_val)
            except ValueError as exc:
                raise ConfigError(f"{where(section, key)}: invalid {section}.{key}={text_val!r}: {exc}") from None
            effective[section][key] = text_val

    items = {}
    for key, text_val in raw.get("checklist", {}).items():
        flag, _, note = text_val.partition("|")
        try:
            items[key] = ChecklistItem(_bool(flag), note.strip())
        except ValueError as exc:
            raise ConfigError(f"{where('checklist', key)}: checklist.{key}: {exc}") from None
    effective["checklist"] = dict(raw.get("checklist", {}))

    v = values
    try:
        scenario = RiskScenario(
            population=PopulationModel(**v["population"]),
            damages=DamageModel(**v["damages"]),
            uncertainty=UncertaintyModel(**v["uncertainty"]),
            roc=RocModel(v["roc"]["d_const"]),
            effort_model=EffortModel.quadratic_linear(v["effort"]["c0"], v["effort"]["h0"]),
        )
        op = OperatingPoint(v["roc"]["p_f"], v["roc"]["p_t"])
        if not 0.0 < v["market"]["rho"] <= 1.0:
            raise ValidationError(f"market.rho must lie in (0, 1], got {v['market']['rho']}")
    except ValidationError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return ScenarioConfig(scenario, op, values, effective, QualityChecklist(items), source)
