"""Key-value experiment configuration.

Format: one ``key = value`` pair per line; blank lines and ``#`` comments are
ignored.  Keys are validated against the schema of the requested command and
unknown keys are rejected, so a typo fails loudly instead of silently using
a default.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from .errors import InputError

# keys shared by every command
COMMON_KEYS = {"command", "seed", "out"}

COMMAND_KEYS: Dict[str, set] = {
    "star": {"class", "b", "multiplicity_cap", "size_cap"},
    "agree": {"class", "b", "data", "test", "label"},
    "certify": {"class", "b", "data", "test", "label", "method", "chunk_size"},
    "coeff": {"class", "dist", "target", "test", "mc_samples"},
    "curve": {"class", "dist", "target", "test", "b", "m_grid", "trials"},
    "tightness": {"term", "b", "d", "k", "m", "m_values", "delta", "trials", "n"},
    "reweight-demo": {"d", "b", "delta", "mc_samples", "radius"},
    "attack": {"class", "b", "data", "test", "label", "mode"},
    "conic": {"data", "test", "label"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    seed: int
    out: str
    options: Tuple[Tuple[str, str], ...]
    raw_text: str

    def get(self, key: str, default: Optional[str] = None) -> Optional[str]:
        for k, v in self.options:
            if k == key:
                return v
        return default

    def get_int(self, key: str, default: Optional[int] = None) -> Optional[int]:
        v = self.get(key)
        return default if v is None else int(v)

    def get_float(self, key: str, default: Optional[float] = None) -> Optional[float]:
        v = self.get(key)
        return default if v is None else float(v)


def parse_config_text(text: str) -> ExperimentConfig:
    pairs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise InputError(f"config line {lineno}: expected 'key = value'")
        key, value = stripped.split("=", 1)
        pairs.append((key.strip(), value.strip()))

    keys = [k for k, _ in pairs]
    if len(keys) != len(set(keys)):
        dupes = sorted({k for k in keys if keys.count(k) > 1})
        raise InputError(f"duplicate config keys: {dupes}")
    table = dict(pairs)

    command = table.get("command")
    if command is None:
        raise InputError("config must set 'command'")
    if command not in COMMAND_KEYS:
        raise InputError(
            f"unknown command {command!r}; expected one of {sorted(COMMAND_KEYS)}"
        )
    allowed = COMMAND_KEYS[command] | COMMON_KEYS
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise InputError(f"unknown config keys for {command!r}: {unknown}")

    seed = int(table.get("seed", "0"))
    out = table.get("out", ".")
    options = tuple(
        (k, v) for k, v in pairs if k not in {"command", "seed", "out"}
    )
    return ExperimentConfig(command, seed, out, options, text)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())
