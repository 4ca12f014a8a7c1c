"""INI-style session configuration with environment overrides.

Sections and keys::

    [session]
    num_pulses = 4096
    seed = 7
    target_failure = 0.01
    abort_threshold = 0
    slack = 0
    codes = hamming_7_4, golay_23_12      ; optional registry filter

    [channels]
    bob = depolarizing:p=0.05
    charlie = ideal

    [seeds]                                ; optional, all five roles
    alice = 1
    ...

Any key can be overridden with ``CONFQKD_<SECTION>__<KEY>``, for example
``CONFQKD_CHANNELS__BOB=intercept_resend``.
"""
from __future__ import annotations

import ast
import configparser
import os
from pathlib import Path
from typing import Mapping

from confqkd.codes import LIBRARY
from confqkd.errors import ConfigError
from confqkd.protocol import ROLES, SessionConfig
from confqkd.qubit import parse_channel

ENV_PREFIX = "CONFQKD_"

_KNOWN = {
    "session": {"num_pulses", "seed", "target_failure", "abort_threshold", "slack", "codes"},
    "channels": {"bob", "charlie"},
    "seeds": set(ROLES),
}


def _parser() -> configparser.ConfigParser:
    return configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=(";", "#"), empty_lines_in_values=False
    )


def parse_config_text(text: str, source: str = "<config>") -> configparser.ConfigParser:
    cp = _parser()
    try:
        cp.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: line outside any section: {exc.line.strip()!r}") from exc
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        try:
            line = ast.literal_eval(line)
        except (ValueError, SyntaxError):
            pass
        raise ConfigError(f"{source}:{lineno}: malformed line {line.strip()!r}") from exc
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", "?")
        raise ConfigError(f"{source}:{lineno}: {exc.message}") from exc
    for section in cp.sections():
        if section not in _KNOWN:
            raise ConfigError(f"{source}: unknown section [{section}]")
        unknown = set(cp[section]) - _KNOWN[section]
        if unknown:
            raise ConfigError(f"{source}: unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")
    return cp


def apply_env(cp: configparser.ConfigParser, environ: Mapping[str, str]) -> None:
    for name, value in sorted(environ.items()):
        if not name.startswith(ENV_PREFIX) or "__" not in name:
            continue
        section, _, key = name[len(ENV_PREFIX):].lower().partition("__")
        if section not in _KNOWN or key not in _KNOWN[section]:
            raise ConfigError(f"environment override {name} names no config key")
        if not cp.has_section(section):
            cp.add_section(section)
        cp[section][key] = value


def _number(section, key, kind, default):
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return kind(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section.name}] {key}: cannot parse {raw!r} as {kind.__name__}") from exc


def session_config(cp: configparser.ConfigParser, seed_override: int | None = None) -> SessionConfig:
    session = cp["session"] if cp.has_section("session") else cp[cp.default_section]
    channels = cp["channels"] if cp.has_section("channels") else {}
    try:
        bob = parse_channel(channels.get("bob", "ideal"))
        charlie = parse_channel(channels.get("charlie", "ideal"))
    except ValueError as exc:
        raise ConfigError(f"[channels] {exc}") from exc
    codes = LIBRARY
    if session.get("codes"):
        codes = tuple(c.strip() for c in session["codes"].split(",") if c.strip())
    seeds = None
    if cp.has_section("seeds"):
        seeds = {role: _number(cp["seeds"], role, int, None) for role in cp["seeds"]}
    seed = _number(session, "seed", int, 0)
    if seed_override is not None:
        seed, seeds = seed_override, None
    cfg = SessionConfig(
        num_pulses=_number(session, "num_pulses", int, 4096),
        channel_bob=bob,
        channel_charlie=charlie,
        target_failure=_number(session, "target_failure", float, 0.01),
        codes=codes,
        abort_threshold=_number(session, "abort_threshold", float, 0.0),
        slack=_number(session, "slack", float, 0.0),
        seed=seed,
        seeds=seeds,
    )
    cfg.validate()
    return cfg


def load_config(
    path: str | os.PathLike | None,
    *,
    environ: Mapping[str, str] | None = None,
    seed_override: int | None = None,
) -> SessionConfig:
    """Read ``path`` (or defaults if ``None``), apply env overrides, validate."""
    if path is None:
        cp = _parser()
    else:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc.strerror}") from exc
        cp = parse_config_text(text, source=str(p))
    apply_env(cp, os.environ if environ is None else environ)
    return session_config(cp, seed_override)
