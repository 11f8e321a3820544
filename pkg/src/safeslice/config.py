"""Experiment configuration, validation, and the discrete allocation grid."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

SERVICE_KINDS = ("video", "vonr", "vr")
AGENT_KINDS = ("a2c", "safeslice", "safeslice_perfect", "sacl")


class ConfigError(ValueError):
    """A configuration invariant is violated."""


class ConfigParseError(ConfigError):
    """The config file itself is malformed."""


@dataclass(frozen=True)
class SlaConfig:
    """Per-slice latency SLA: cumulative threshold, instantaneous threshold,
    and the sigmoid parameters used by the reward."""

    cumulative_ms: float
    instantaneous_ms: float
    steepness_per_ms: float = 2.0
    inflection_ms: float | None = None  # defaults to the cumulative threshold

    def __post_init__(self):
        if self.inflection_ms is None:
            object.__setattr__(self, "inflection_ms", float(self.cumulative_ms))


@dataclass(frozen=True)
class SliceSpec:
    id: int
    service: str
    weight: float
    sla: SlaConfig
    queue_capacity: int = 2000


@dataclass(frozen=True)
class SimParams:
    total_bandwidth_bytes: int = 18750  # bytes per TTI
    tti_ms: float = 1.0
    window_ttis: int = 100
    allocation_step_pct: int = 10
    allow_underallocation: bool = True
    latency_cap_ms: float = 50.0
    seed: int = 1234


@dataclass(frozen=True)
class RewardConfig:
    w_bandwidth: float = 0.5
    w_latency: float = 0.5


@dataclass(frozen=True)
class AgentConfig:
    kind: str = "safeslice"
    hidden_sizes: tuple[int, ...] = (64, 64)
    learning_rate: float = 0.003
    discount: float = 0.9
    batch_size: int = 200
    entropy_coef: float = 0.01
    # SAC-Lagrangian extras
    lambda_lr: float = 0.02
    target_update: float = 0.01
    buffer_size: int = 5000
    target_entropy_factor: float = 0.5


@dataclass(frozen=True)
class CostModelConfig:
    n_estimators: int = 100
    learning_rate: float = 0.5
    max_depth: int = 9
    min_child_weight: int = 14
    alpha: float = 10.0
    subsample: float = 1.0


@dataclass(frozen=True)
class HarnessConfig:
    train_windows: int = 2000
    test_windows: int = 2000


@dataclass
class ActionSpace:
    """Ordered discrete grid of per-slice bandwidth shares (percent)."""

    actions: list[tuple[int, ...]]
    step_pct: int

    def __post_init__(self):
        self._index = {a: i for i, a in enumerate(self.actions)}
        self.matrix = np.array(self.actions, dtype=np.float64)

    @property
    def count(self) -> int:
        return len(self.actions)

    def index_of(self, shares) -> int:
        return self._index[tuple(shares)]

    def __len__(self):
        return len(self.actions)

    def __getitem__(self, i) -> tuple[int, ...]:
        return self.actions[i]


def enumerate_action_space(n_slices, step_pct, allow_underallocation=True):
    """All share vectors in multiples of step_pct with sum == 100 (or <= 100
    when underallocation is allowed), in lexicographic order."""
    if n_slices < 1:
        raise ConfigError(f"n_slices must be >= 1, got {n_slices}")
    if step_pct < 1 or 100 % step_pct != 0:
        raise ConfigError(f"100 mod allocation_step_pct must be 0, got step {step_pct}")
    out = []

    def rec(prefix, remaining):
        if len(prefix) == n_slices - 1:
            if allow_underallocation:
                for b in range(0, remaining + 1, step_pct):
                    out.append(tuple(prefix) + (b,))
            else:
                out.append(tuple(prefix) + (remaining,))
            return
        for b in range(0, remaining + 1, step_pct):
            rec(prefix + [b], remaining - b)

    rec([], 100)
    return ActionSpace(actions=out, step_pct=step_pct)


@dataclass(frozen=True)
class ExperimentConfig:
    sim: SimParams = field(default_factory=SimParams)
    slices: tuple[SliceSpec, ...] = ()
    reward: RewardConfig = field(default_factory=RewardConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    cost_model: CostModelConfig = field(default_factory=CostModelConfig)
    harness: HarnessConfig = field(default_factory=HarnessConfig)
    constrained_services: tuple[str, ...] = ("vr",)

    @property
    def n_slices(self) -> int:
        return len(self.slices)

    def action_space(self) -> ActionSpace:
        return enumerate_action_space(
            self.n_slices, self.sim.allocation_step_pct, self.sim.allow_underallocation
        )

    def constrained_slice_ids(self):
        return [s.id for s in self.slices if s.service in self.constrained_services]

    def slice_by_id(self, sid) -> SliceSpec:
        for s in self.slices:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def validate(self):
        sim = self.sim
        if sim.total_bandwidth_bytes <= 0:
            raise ConfigError(f"total_bandwidth_bytes must be > 0, got {sim.total_bandwidth_bytes}")
        if sim.tti_ms <= 0:
            raise ConfigError(f"tti_ms must be > 0, got {sim.tti_ms}")
        if sim.window_ttis < 1:
            raise ConfigError(f"window_ttis must be >= 1, got {sim.window_ttis}")
        if sim.allocation_step_pct < 1 or 100 % sim.allocation_step_pct != 0:
            raise ConfigError(
                f"100 mod allocation_step_pct must be 0, got step {sim.allocation_step_pct}"
            )
        if sim.latency_cap_ms <= 0:
            raise ConfigError(f"latency_cap_ms must be > 0, got {sim.latency_cap_ms}")
        if not self.slices:
            raise ConfigError("at least one slice must be configured")
        ids = [s.id for s in self.slices]
        if ids != list(range(1, len(ids) + 1)):
            raise ConfigError(f"slice ids must be 1..S without gaps, got {ids}")
        wsum = sum(s.weight for s in self.slices)
        if abs(wsum - 1.0) > 1e-6:
            raise ConfigError(f"slice priority weights must sum to 1, got sum {wsum:g}")
        for s in self.slices:
            if s.service not in SERVICE_KINDS:
                raise ConfigError(f"slice {s.id}: unknown service {s.service!r}")
            if not (0.0 <= s.weight <= 1.0):
                raise ConfigError(f"slice {s.id}: weight must be in [0,1], got {s.weight}")
            if s.queue_capacity < 1:
                raise ConfigError(f"slice {s.id}: queue_capacity must be >= 1, got {s.queue_capacity}")
            sla = s.sla
            if sla.cumulative_ms <= 0 or sla.instantaneous_ms <= 0:
                raise ConfigError(f"slice {s.id}: SLA thresholds must be > 0")
            if sla.steepness_per_ms <= 0:
                raise ConfigError(f"slice {s.id}: sigmoid steepness must be > 0")
            if sla.inflection_ms <= 0:
                raise ConfigError(f"slice {s.id}: sigmoid inflection must be > 0")
        rw = self.reward
        if not (0.0 <= rw.w_bandwidth <= 1.0 and 0.0 <= rw.w_latency <= 1.0):
            raise ConfigError("reward weights must be in [0,1]")
        if abs(rw.w_bandwidth + rw.w_latency - 1.0) > 1e-9:
            raise ConfigError(
                f"w_bandwidth + w_latency must equal 1, got {rw.w_bandwidth + rw.w_latency:g}"
            )
        ag = self.agent
        if ag.kind not in AGENT_KINDS:
            raise ConfigError(f"unknown agent kind {ag.kind!r}")
        if not (0.0005 <= ag.learning_rate <= 0.01):
            raise ConfigError(f"agent learning_rate must be in [0.0005, 0.01], got {ag.learning_rate}")
        if not (0.7 <= ag.discount <= 0.95):
            raise ConfigError(f"agent discount must be in [0.7, 0.95], got {ag.discount}")
        if ag.batch_size < 1:
            raise ConfigError("agent batch_size must be >= 1")
        cm = self.cost_model
        if cm.n_estimators < 0 or cm.max_depth < 1 or cm.min_child_weight < 1:
            raise ConfigError("cost model tree limits must be positive")
        if cm.alpha < 0 or not (0.0 < cm.subsample <= 1.0):
            raise ConfigError("cost model alpha must be >= 0 and subsample in (0,1]")
        for svc in self.constrained_services:
            if svc not in SERVICE_KINDS:
                raise ConfigError(f"constrained service {svc!r} is not a known service kind")
        return self


def default_config(seed=1234) -> ExperimentConfig:
    """Three-slice reference setup: video 12 ms, VoNR 20 ms, VR 10 ms."""
    third = 1.0 / 3.0
    slices = (
        SliceSpec(1, "video", third, SlaConfig(12.0, 12.0)),
        SliceSpec(2, "vonr", third, SlaConfig(20.0, 20.0)),
        SliceSpec(3, "vr", third, SlaConfig(10.0, 10.0)),
    )
    return ExperimentConfig(sim=SimParams(seed=seed), slices=slices).validate()


# ---------------------------------------------------------------------------
# Key-value file format:  one `key = value` per line, `#` starts a comment.
# Values parse as int, float, true/false, comma tuple, or bare string.
# Slice keys look like `slice.2.sla.cumulative_ms`.


def _parse_scalar(text):
    t = text.strip()
    low = t.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        pass
    return t


def _format_scalar(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def parse_kv_file(path):
    """Read a key-value file into an ordered {key: raw-string} mapping."""
    mapping = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigParseError(f"{path}:{lineno}: empty key")
        mapping[key] = value.strip()
    return mapping


def apply_overrides(mapping, overrides):
    """Apply CLI `--set key=value` pairs on top of a raw mapping."""
    out = dict(mapping)
    for item in overrides:
        if "=" not in item:
            raise ConfigParseError(f"override {item!r} is not of the form key=value")
        key, _, value = item.partition("=")
        out[key.strip()] = value.strip()
    return out


_SIM_KEYS = {
    "total_bandwidth_bytes": int,
    "tti_ms": float,
    "window_ttis": int,
    "allocation_step_pct": int,
    "allow_underallocation": bool,
    "latency_cap_ms": float,
    "seed": int,
}
_REWARD_KEYS = {"w_bandwidth": float, "w_latency": float}
_AGENT_KEYS = {
    "kind": str,
    "learning_rate": float,
    "discount": float,
    "batch_size": int,
    "entropy_coef": float,
    "lambda_lr": float,
    "target_update": float,
    "buffer_size": int,
    "target_entropy_factor": float,
}
_COST_KEYS = {
    "n_estimators": int,
    "learning_rate": float,
    "max_depth": int,
    "min_child_weight": int,
    "alpha": float,
    "subsample": float,
}
_HARNESS_KEYS = {"train_windows": int, "test_windows": int}
_SLA_KEYS = {
    "cumulative_ms": float,
    "instantaneous_ms": float,
    "steepness_per_ms": float,
    "inflection_ms": float,
}
_SLICE_KEYS = {"service": str, "weight": float, "queue_capacity": int}


def _coerce(key, raw, want):
    val = _parse_scalar(raw) if isinstance(raw, str) else raw
    if want is bool:
        if isinstance(val, bool):
            return val
        raise ConfigParseError(f"{key}: expected true/false, got {raw!r}")
    if want is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigParseError(f"{key}: expected integer, got {raw!r}")
        return val
    if want is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigParseError(f"{key}: expected number, got {raw!r}")
        return float(val)
    return str(val)


def config_from_mapping(mapping) -> ExperimentConfig:
    sim_kw, reward_kw, agent_kw, cost_kw, harness_kw = {}, {}, {}, {}, {}
    slice_kw = {}
    constrained = None
    hidden = None
    for key, raw in mapping.items():
        parts = key.split(".")
        if parts[0] == "sim" and len(parts) == 2 and parts[1] in _SIM_KEYS:
            sim_kw[parts[1]] = _coerce(key, raw, _SIM_KEYS[parts[1]])
        elif parts[0] == "reward" and len(parts) == 2 and parts[1] in _REWARD_KEYS:
            reward_kw[parts[1]] = _coerce(key, raw, _REWARD_KEYS[parts[1]])
        elif parts[0] == "agent" and len(parts) == 2 and parts[1] == "hidden_sizes":
            hidden = tuple(int(v) for v in str(raw).split(",") if v.strip())
        elif parts[0] == "agent" and len(parts) == 2 and parts[1] in _AGENT_KEYS:
            agent_kw[parts[1]] = _coerce(key, raw, _AGENT_KEYS[parts[1]])
        elif parts[0] == "cost" and len(parts) == 2 and parts[1] in _COST_KEYS:
            cost_kw[parts[1]] = _coerce(key, raw, _COST_KEYS[parts[1]])
        elif parts[0] == "harness" and len(parts) == 2 and parts[1] in _HARNESS_KEYS:
            harness_kw[parts[1]] = _coerce(key, raw, _HARNESS_KEYS[parts[1]])
        elif key == "safety.constrained_services":
            constrained = tuple(v.strip() for v in str(raw).split(",") if v.strip())
        elif parts[0] == "slice" and len(parts) >= 3:
            try:
                sid = int(parts[1])
            except ValueError:
                raise ConfigParseError(f"bad slice id in key {key!r}")
            entry = slice_kw.setdefault(sid, {})
            if len(parts) == 3 and parts[2] in _SLICE_KEYS:
                entry[parts[2]] = _coerce(key, raw, _SLICE_KEYS[parts[2]])
            elif len(parts) == 4 and parts[2] == "sla" and parts[3] in _SLA_KEYS:
                entry.setdefault("sla", {})[parts[3]] = _coerce(key, raw, _SLA_KEYS[parts[3]])
            else:
                raise ConfigParseError(f"unknown config key {key!r}")
        else:
            raise ConfigParseError(f"unknown config key {key!r}")

    slices = []
    for sid in sorted(slice_kw):
        entry = slice_kw[sid]
        missing = [k for k in ("service", "weight") if k not in entry]
        if missing:
            raise ConfigParseError(f"slice {sid}: missing key(s) {missing}")
        sla_kw = entry.get("sla", {})
        for req in ("cumulative_ms", "instantaneous_ms"):
            if req not in sla_kw:
                raise ConfigParseError(f"slice {sid}: missing slice.{sid}.sla.{req}")
        slices.append(
            SliceSpec(
                id=sid,
                service=entry["service"],
                weight=entry["weight"],
                sla=SlaConfig(**sla_kw),
                queue_capacity=entry.get("queue_capacity", 2000),
            )
        )

    agent = AgentConfig(**agent_kw) if hidden is None else AgentConfig(hidden_sizes=hidden, **agent_kw)
    cfg = ExperimentConfig(
        sim=SimParams(**sim_kw),
        slices=tuple(slices),
        reward=RewardConfig(**reward_kw),
        agent=agent,
        cost_model=CostModelConfig(**cost_kw),
        harness=HarnessConfig(**harness_kw),
        constrained_services=constrained if constrained is not None else ("vr",),
    )
    return cfg.validate()


def config_to_mapping(config: ExperimentConfig):
    m = {}
    for name, _ in _SIM_KEYS.items():
        m[f"sim.{name}"] = _format_scalar(getattr(config.sim, name))
    for s in config.slices:
        m[f"slice.{s.id}.service"] = s.service
        m[f"slice.{s.id}.weight"] = _format_scalar(s.weight)
        m[f"slice.{s.id}.queue_capacity"] = _format_scalar(s.queue_capacity)
        for name in _SLA_KEYS:
            m[f"slice.{s.id}.sla.{name}"] = _format_scalar(getattr(s.sla, name))
    for name in _REWARD_KEYS:
        m[f"reward.{name}"] = _format_scalar(getattr(config.reward, name))
    m["agent.hidden_sizes"] = _format_scalar(config.agent.hidden_sizes)
    for name in _AGENT_KEYS:
        m[f"agent.{name}"] = _format_scalar(getattr(config.agent, name))
    for name in _COST_KEYS:
        m[f"cost.{name}"] = _format_scalar(getattr(config.cost_model, name))
    for name in _HARNESS_KEYS:
        m[f"harness.{name}"] = _format_scalar(getattr(config.harness, name))
    m["safety.constrained_services"] = ",".join(config.constrained_services)
    return m


def load_config(path, overrides=()) -> ExperimentConfig:
    mapping = parse_kv_file(path)
    if overrides:
        mapping = apply_overrides(mapping, overrides)
    return config_from_mapping(mapping)


def save_config(config: ExperimentConfig, path):
    lines = [f"{k} = {v}" for k, v in config_to_mapping(config).items()]
    Path(path).write_text("\n".join(lines) + "\n")
