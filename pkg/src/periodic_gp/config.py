"""Flat ``key = value`` experiment configuration with dotted keys.

Lines starting with ``#`` are comments. Every key must be known; values are
converted to the key's type and range-checked, and errors name the field.
Per-policy settings live under ``policy.<name>.<field>`` and fall back to
the shared ``gp.*``, ``beta.*``, ``ucb.*`` and ``env.*`` values.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .kernels import Linear, Matern, SquaredExponential
from .policies import (
    POLICY_CLASSES,
    ContinuousBox,
    Empirical,
    FiniteArm,
)

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "load_config", "MODES"]

MODES = ("synthetic", "replay", "sweep-tau", "info-gain")


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


def _int(v):
    return int(v)


def _float(v):
    return float(v)


def _str(v):
    return str(v).strip()


def _int_list(v):
    items = [x.strip() for x in str(v).split(",") if x.strip()]
    return tuple(int(x) for x in items)


def _str_list(v):
    return tuple(x.strip() for x in str(v).split(",") if x.strip())


def _choice(*options):
    def conv(v):
        v = str(v).strip()
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return v

    return conv


def _positive(conv):
    def wrapped(v):
        x = conv(v)
        if not x > 0:
            raise ValueError("must be positive")
        return x

    return wrapped


def _non_negative(conv):
    def wrapped(v):
        x = conv(v)
        if x < 0:
            raise ValueError("must be non-negative")
        return x

    return wrapped


_KERNEL_NAMES = ("se", "matern12", "matern32", "matern52", "linear")
_BETA_KINDS = ("empirical", "finite", "continuous")

# key -> (converter, default); a default of None marks a required key
GLOBAL_KEYS = {
    "mode": (_choice(*MODES), "synthetic"),
    "seed": (_int, None),
    "reps": (_positive(_int), 20),
    "horizon": (_positive(_int), 200),
    "out": (_str, "results"),
    "jobs": (_positive(_int), 1),
    "policies": (_str_list, ("periodic", "gp", "contextual", "resetting", "time_varying")),
    "env.tau": (_positive(_int), 20),
    "env.grid_size": (_positive(_int), 101),
    "env.box_width": (_positive(_float), 10.0),
    "env.action_kernel": (_choice(*_KERNEL_NAMES), "se"),
    "env.action_length_scale": (_positive(_float), 1.0),
    "env.time_length_scale": (_positive(_float), 1.0),
    "env.noise_variance": (_non_negative(_float), 1.0),
    "env.replay_path": (_str, ""),
    "env.warmup": (_non_negative(_int), 48),
    "env.standardize": (_choice("none", "global", "per-arm"), "global"),
    "env.arm_encoding": (_choice("onehot", "index"), "onehot"),
    "env.warm_start": (_choice("best", "all"), "best"),
    "gp.noise_variance": (_positive(_float), 1.0),
    "gp.action_kernel": (_choice(*_KERNEL_NAMES), "se"),
    "gp.action_length_scale": (_positive(_float), 1.0),
    "ucb.exploration": (_choice("sqrt", "inverse_sqrt"), "sqrt"),
    "kernel.form": (_choice("standard", "double"), "standard"),
    "beta.kind": (_choice(*_BETA_KINDS), "empirical"),
    "beta.a": (_positive(_float), 0.8),
    "beta.b": (_positive(_float), 0.4),
    "beta.delta": (_positive(_float), 0.1),
    "beta.c1": (_positive(_float), 1.0),
    "beta.c2": (_positive(_float), 1.0),
    "sweep.taus": (_int_list, (6, 12, 20, 22, 24, 26, 28)),
    "infogain.trials": (_positive(_int), 100),
    "bound.delta": (_positive(_float), 0.1),
}

# fields accepted under policy.<name>.
_COMMON_POLICY_KEYS = {
    "action_kernel": _choice(*_KERNEL_NAMES),
    "action_length_scale": _positive(_float),
    "noise_variance": _positive(_float),
    "exploration": _choice("sqrt", "inverse_sqrt"),
    "beta.kind": _choice(*_BETA_KINDS),
    "beta.a": _positive(_float),
    "beta.b": _positive(_float),
    "beta.delta": _positive(_float),
    "beta.c1": _positive(_float),
    "beta.c2": _positive(_float),
}
_SPECIFIC_POLICY_KEYS = {
    "periodic": {
        "tau": _positive(_int),
        "time_length_scale": _positive(_float),
        "kernel_form": _choice("standard", "double"),
    },
    "gp": {},
    "contextual": {"time_length_scale": _positive(_float)},
    "resetting": {"block_size": _positive(_int), "phase": _non_negative(_int)},
    "time_varying": {"epsilon": _non_negative(_float)},
    "oracle": {},
}
_POLICY_DEFAULTS = {
    "periodic": {"time_length_scale": 10.0},
    "contextual": {"time_length_scale": 10.0},
    "resetting": {"block_size": 15, "phase": 0},
    "time_varying": {"epsilon": 0.01},
}

_POLICY_KEY = re.compile(r"^policy\.([a-z_]+)\.(.+)$")


@dataclass
class ExperimentConfig:
    """Resolved configuration: every global key plus per-policy overrides."""

    values: dict
    policy_values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    @property
    def mode(self):
        return self.values["mode"]

    def policy_param(self, name, key):
        own = self.policy_values.get(name, {})
        if key in own:
            return own[key]
        if key in _POLICY_DEFAULTS.get(name, {}):
            return _POLICY_DEFAULTS[name][key]
        if key == "tau":
            return self.values["env.tau"]
        if key == "kernel_form":
            return self.values["kernel.form"]
        if key == "exploration":
            return self.values["ucb.exploration"]
        if key in ("action_kernel", "action_length_scale", "noise_variance"):
            return self.values[f"gp.{key}"]
        return self.values[key]

    # -- object builders -----------------------------------------------------

    def action_kernel(self, name=None, prefix="gp"):
        if name is None:
            kind = self.values[f"{prefix}.action_kernel"]
            scale = self.values[f"{prefix}.action_length_scale"]
        else:
            kind = self.policy_param(name, "action_kernel")
            scale = self.policy_param(name, "action_length_scale")
        return make_action_kernel(kind, scale)

    def beta_schedule(self, name, arm_count, d, box_width):
        kind = self.policy_param(name, "beta.kind")
        p = lambda k: self.policy_param(name, f"beta.{k}")  # noqa: E731
        if kind == "empirical":
            return Empirical(p("a"), p("b"))
        if kind == "finite":
            return FiniteArm(arm_count, p("delta"))
        return ContinuousBox(d, box_width, p("delta"), p("c1"), p("c2"))

    def build_policy(self, name, *, arm_count, d, box_width, env=None, period=None):
        cls = POLICY_CLASSES[name]
        if name == "oracle":
            return cls(env=env)
        kw = dict(
            action_kernel=self.action_kernel(name),
            beta_schedule=self.beta_schedule(name, arm_count, d, box_width),
            noise_variance=self.policy_param(name, "noise_variance"),
            exploration=self.policy_param(name, "exploration"),
        )
        if name == "periodic":
            kw.update(
                period=period if period is not None else self.policy_param(name, "tau"),
                time_length_scale=self.policy_param(name, "time_length_scale"),
                kernel_form=self.policy_param(name, "kernel_form"),
            )
        elif name == "contextual":
            kw["time_length_scale"] = self.policy_param(name, "time_length_scale")
        elif name == "resetting":
            kw["block_size"] = self.policy_param(name, "block_size")
            kw["reset_phase"] = self.policy_param(name, "phase")
        elif name == "time_varying":
            kw["epsilon"] = self.policy_param(name, "epsilon")
        return cls(**kw)

    def to_lines(self):
        """Config-file lines that reproduce this configuration."""
        lines = []
        for key in GLOBAL_KEYS:
            lines.append(f"{key} = {_format_value(self.values[key])}")
        for name in sorted(self.policy_values):
            for key in sorted(self.policy_values[name]):
                value = _format_value(self.policy_values[name][key])
                lines.append(f"policy.{name}.{key} = {value}")
        return lines


def make_action_kernel(kind, length_scale):
    if kind == "se":
        return SquaredExponential(length_scale)
    if kind == "linear":
        return Linear()
    nu = {"matern12": 0.5, "matern32": 1.5, "matern52": 2.5}[kind]
    return Matern(nu, length_scale)


def _format_value(v):
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_lines(lines, source="<config>"):
    raw = {}
    for lineno, line in enumerate(lines, start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {text!r}")
        key, value = (part.strip() for part in text.split("=", 1))
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def parse_config(raw, overrides=None):
    """Validate a ``{key: text}`` mapping into an :class:`ExperimentConfig`."""
    raw = dict(raw)
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    values, policy_values, errors = {}, {}, []
    for key, text in raw.items():
        m = _POLICY_KEY.match(key)
        if m:
            name, sub = m.groups()
            allowed = _SPECIFIC_POLICY_KEYS.get(name)
            if allowed is None:
                errors.append(f"{key}: unknown policy {name!r}")
                continue
            conv = allowed.get(sub) or _COMMON_POLICY_KEYS.get(sub)
            if conv is None or (name == "oracle" and sub not in allowed):
                errors.append(f"{key}: unknown key")
                continue
            try:
                policy_values.setdefault(name, {})[sub] = conv(text)
            except (TypeError, ValueError) as exc:
                errors.append(f"{key}: invalid value {text!r} ({exc})")
            continue
        if key not in GLOBAL_KEYS:
            errors.append(f"{key}: unknown key")
            continue
        try:
            values[key] = GLOBAL_KEYS[key][0](text)
        except (TypeError, ValueError) as exc:
            errors.append(f"{key}: invalid value {text!r} ({exc})")
    for key, (_, default) in GLOBAL_KEYS.items():
        if key not in values:
            if default is None:
                if not any(e.startswith(f"{key}:") for e in errors):
                    errors.append(f"{key}: required (no default)")
            else:
                values[key] = default
    if not errors:
        errors.extend(_cross_checks(values, policy_values))
    if errors:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))
    return ExperimentConfig(values, policy_values)


def _cross_checks(values, policy_values):
    errors = []
    for name in values["policies"]:
        if name not in POLICY_CLASSES:
            errors.append(f"policies: unknown policy {name!r}")
    if len(set(values["policies"])) != len(values["policies"]):
        errors.append("policies: duplicate entries")
    if not values["policies"]:
        errors.append("policies: at least one policy required")
    for name, keys in policy_values.items():
        eps = keys.get("epsilon")
        if eps is not None and not eps < 1:
            errors.append(f"policy.{name}.epsilon: must lie in [0, 1)")
        for dk in ("beta.delta",):
            if dk in keys and not keys[dk] < 1:
                errors.append(f"policy.{name}.{dk}: must lie in (0, 1)")
    if not values["beta.delta"] < 1:
        errors.append("beta.delta: must lie in (0, 1)")
    if not values["bound.delta"] < 1:
        errors.append("bound.delta: must lie in (0, 1)")
    mode = values["mode"]
    if mode == "replay" and not values["env.replay_path"]:
        errors.append("env.replay_path: required in replay mode")
    if mode == "sweep-tau" and not values["sweep.taus"]:
        errors.append("sweep.taus: at least one period required")
    if mode == "info-gain" and values["horizon"] % values["env.tau"]:
        errors.append(
            f"horizon: {values['horizon']} is not a multiple of env.tau={values['env.tau']}"
        )
    return errors


def load_config(path, overrides=None):
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(parse_lines(lines, str(path)), overrides)
