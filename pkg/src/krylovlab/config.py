"""Flat key=value experiment configs (INI sections) -> service request payloads.

The CLI is a thin client: this module only restructures text into the JSON
the service expects, resolves Hamiltonian file references against the
config's own directory, and applies command-line overrides. All semantic
validation (types, ranges, unknown keys) happens in the service schemas.
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .errors import ConfigError

KNOWN_SECTIONS = ("hamiltonian", "state", "run", "shots", "sweep", "hyperopt")
_LIST_KEYS = {
    ("sweep", "values"),
    ("hyperopt", "j_values"),
    ("hyperopt", "window_presets"),
    ("hyperopt", "windows"),
}


def load_config(path: str | Path) -> dict[str, dict[str, str]]:
    """Read an INI config into {section: {key: raw value}}."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        parser.read_string(path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    raw: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in KNOWN_SECTIONS:
            raise ConfigError(
                f"unknown config section [{section}]; expected one of {KNOWN_SECTIONS}"
            )
        raw[section] = dict(parser.items(section))
    if "hamiltonian" not in raw:
        raise ConfigError("config needs a [hamiltonian] section")
    return raw


def apply_overrides(raw: dict[str, dict[str, str]], overrides: list[str]):
    """Apply command-line 'section.key=value' overrides in place."""
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        target, value = item.split("=", 1)
        section, key = target.split(".", 1)
        if section not in KNOWN_SECTIONS:
            raise ConfigError(f"override targets unknown section [{section}]")
        raw.setdefault(section, {})[key.strip()] = value.strip()


def _split_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _coerce(section: str, key: str, value: str):
    if (section, key) in _LIST_KEYS:
        items = _split_list(value)
        if key == "windows":
            windows = []
            for item in items:
                parts = item.split(":")
                if len(parts) != 2:
                    raise ConfigError(f"window {item!r} is not of the form lo:hi")
                windows.append([parts[0], parts[1]])
            return windows
        return items
    return value


def _section_payload(raw: dict[str, dict[str, str]], section: str) -> dict:
    return {
        key: _coerce(section, key, value) for key, value in raw.get(section, {}).items()
    }


def run_request_payload(raw: dict[str, dict[str, str]], config_dir: Path) -> dict:
    """The /run request body, with any Hamiltonian file inlined as text."""
    hamiltonian = _section_payload(raw, "hamiltonian")
    path = hamiltonian.pop("path", None)
    if path is not None:
        file_path = Path(path)
        if not file_path.is_absolute():
            file_path = config_dir / file_path
        if not file_path.is_file():
            raise ConfigError(f"hamiltonian file not found: {file_path}")
        hamiltonian["text"] = file_path.read_text()
        hamiltonian.setdefault("family", "file")
    payload: dict = {"hamiltonian": hamiltonian}
    for section in ("state", "run", "shots"):
        if raw.get(section):
            payload[section] = _section_payload(raw, section)
    return payload


def sweep_payload(raw: dict[str, dict[str, str]], config_dir: Path) -> dict:
    if "sweep" not in raw:
        raise ConfigError("sweep verb needs a [sweep] section (parameter, values)")
    axis = _section_payload(raw, "sweep")
    return {"base": run_request_payload(raw, config_dir), "axis": axis}


def hyperopt_payload(raw: dict[str, dict[str, str]], config_dir: Path) -> dict:
    if "hyperopt" not in raw:
        raise ConfigError("hyperopt verb needs a [hyperopt] section")
    options = _section_payload(raw, "hyperopt")
    payload = {"base": run_request_payload(raw, config_dir)}
    payload.update(options)
    return payload
