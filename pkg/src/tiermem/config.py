"""Config file loading.

Agents and the server read one TOML file with up to four tables:

    [agent]       total_tokens, max_chain, warn_ratio, evict_target_ratio,
                  tick_interval_s, page_size, functions
    [processor]   type plus backend-specific keys, passed through
    [embedder]    type plus backend-specific keys, passed through
    [budget]      total, system_reserved, working_cap, queue_cap

Every table is optional; unknown tables or [agent]/[budget] keys are
rejected loudly rather than ignored, since a typoed threshold silently
falling back to its default is the worst failure mode a config can have.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib  # type: ignore[no-redef]

from .agent import AgentConfig
from .context import TokenBudget

_AGENT_KEYS = {
    "total_tokens": int,
    "max_chain": int,
    "warn_ratio": float,
    "evict_target_ratio": float,
    "tick_interval_s": float,
    "page_size": int,
    "functions": list,
}
_BUDGET_KEYS = {"total", "system_reserved", "working_cap", "queue_cap"}
_TABLES = {"agent", "processor", "embedder", "budget"}


def parse_agent_config(data: dict[str, Any]) -> AgentConfig:
    """Build an AgentConfig from parsed TOML-shaped data."""
    if not isinstance(data, dict):
        raise ValueError("config root must be a table")
    unknown = set(data) - _TABLES
    if unknown:
        raise ValueError(f"unknown config table: {sorted(unknown)[0]}")

    kwargs: dict[str, Any] = {}
    agent = data.get("agent", {})
    if not isinstance(agent, dict):
        raise ValueError("[agent] must be a table")
    for key, value in agent.items():
        want = _AGENT_KEYS.get(key)
        if want is None:
            raise ValueError(f"unknown config key: agent.{key}")
        if want is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if not isinstance(value, want) or isinstance(value, bool):
            raise ValueError(f"agent.{key} must be {want.__name__}")
        kwargs[key] = tuple(value) if key == "functions" else value

    budget = data.get("budget")
    if budget is not None:
        if not isinstance(budget, dict):
            raise ValueError("[budget] must be a table")
        unknown = set(budget) - _BUDGET_KEYS
        if unknown:
            raise ValueError(f"unknown config key: budget.{sorted(unknown)[0]}")
        missing = _BUDGET_KEYS - set(budget)
        if missing:
            raise ValueError(f"budget requires key: {sorted(missing)[0]}")
        kwargs["budget"] = TokenBudget(
            total=budget["total"],
            system_reserved=budget["system_reserved"],
            working_cap=budget["working_cap"],
            queue_cap=budget["queue_cap"],
        )
        kwargs.setdefault("total_tokens", budget["total"])

    for table in ("processor", "embedder"):
        section = data.get(table)
        if section is not None:
            if not isinstance(section, dict) or not isinstance(section.get("type"), str):
                raise ValueError(f"[{table}] must be a table with a string 'type'")
            kwargs[table] = dict(section)

    if "functions" in kwargs:
        funcs = kwargs["functions"]
        if not all(isinstance(f, str) for f in funcs):
            raise ValueError("agent.functions must be a list of strings")

    return AgentConfig(**kwargs)


def load_agent_config(path: Path | str) -> AgentConfig:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    return parse_agent_config(data)
