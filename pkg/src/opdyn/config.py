"""INI experiment configs for the CLI: one section per concern, strict key
validation (unknown sections or keys fail), and a one-dimensional sweep axis.

Numbers accept fractions ("1/4") and decimals; a two-part "lo:hi" value is a
per-trial uniform range, and sweep values accept "start:stop:step"."""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from . import harness

_NETWORK_KEYS = {
    "symmetric_two_block": {"n_per_block", "a_in", "a_out"},
    "stochastic_two_block": {"n_per_block", "p_in", "p_out"},
    "erdos_renyi": {"n", "p"},
    "watts_strogatz": {"n", "r", "k"},
    "hyperbolic": {"n", "gamma", "temperature", "mean_degree"},
    "complete": {"n", "weight"},
    "edge_list": {"path"},
}

_INT_PARAMS = {"n", "n_per_block", "r", "k"}

_SECTION_KEYS = {
    "experiment": {"id", "trials", "seed", "update", "max_steps"},
    "grid": {"delta", "lambda"},
    "network": None,  # validated against the model's key set
    "weights": {"w_in", "w_out"},
    "media": {"b", "b_tilde"},
    "init": {"scheme", "target_abs_mean", "values"},
    "sweep": {"axis", "values"},
}

_AXIS_TARGETS = {
    "media.b_tilde",
    "media.b",
    "weights.w_in",
    "weights.w_out",
    "init.target_abs_mean",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """A parsed config: the experiment spec, the sweep axis override list
    (None for single-run configs), and explicit initial opinions when the
    init section pins them instead of a sampling scheme."""

    spec: harness.ExperimentSpec
    axis: list[dict] | None
    init_values: list[Fraction] | None


def _number(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad number {text!r}") from exc


def _value(text: str, integer: bool = False):
    """A scalar, or a (lo, hi) uniform range written lo:hi."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 2:
            raise ConfigError(f"range must be lo:hi, got {text!r}")
        lo, hi = (_number(p) for p in parts)
        return (int(lo), int(hi)) if integer else (lo, hi)
    return int(_number(text)) if integer else _number(text)


def _value_list(text: str) -> list[float]:
    """Comma-separated numbers, or an inclusive start:stop:step grid."""
    text = text.strip()
    if ":" in text and "," not in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step = (Fraction(p) for p in parts)
        if step <= 0:
            raise ConfigError("grid step must be positive")
        out = []
        v = start
        while v <= stop:
            out.append(float(v))
            v += step
        return out
    return [_number(p) for p in text.split(",") if p.strip()]


def parse_config(path: str) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=None)
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config {path!r}")
    for section in parser.sections():
        if section not in _SECTION_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        allowed = _SECTION_KEYS[section]
        if allowed is not None:
            for key in parser[section]:
                if key not in allowed:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")

    if "network" not in parser:
        raise ConfigError("config needs a [network] section")
    net = parser["network"]
    model = net.get("model")
    if model not in _NETWORK_KEYS:
        raise ConfigError(f"unknown network model {model!r}")
    allowed = _NETWORK_KEYS[model] | {"model", "partition"}
    for key in net:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} for network model {model}")
    params = {}
    for key in _NETWORK_KEYS[model]:
        if key not in net:
            raise ConfigError(f"network model {model} needs {key!r}")
        if key == "path":
            params[key] = net[key]
        else:
            params[key] = _value(net[key], integer=key in _INT_PARAMS)

    exp = parser["experiment"] if "experiment" in parser else {}
    grid = parser["grid"] if "grid" in parser else {}
    weights = parser["weights"] if "weights" in parser else {}
    media = parser["media"] if "media" in parser else {}
    init_sec = parser["init"] if "init" in parser else {}

    b = _number(media["b"]) if "b" in media else None
    b_tilde = _number(media["b_tilde"]) if "b_tilde" in media else None
    if (b is None) == (b_tilde is None):
        raise ConfigError("[media] must set exactly one of b and b_tilde")

    init_values = None
    scheme = init_sec.get("scheme", "non_divergent")
    if scheme == "explicit":
        if "values" not in init_sec:
            raise ConfigError("explicit init needs values")
        init_values = [Fraction(p.strip()) for p in init_sec["values"].split(",")]
        init = harness.non_divergent()  # placeholder; ignored for explicit runs
    elif scheme == harness.FIXED_MEAN:
        if "target_abs_mean" not in init_sec:
            raise ConfigError("fixed_mean needs target_abs_mean")
        init = harness.fixed_mean(_number(init_sec["target_abs_mean"]))
    else:
        init = harness.InitScheme(scheme)

    spec = harness.ExperimentSpec(
        experiment_id=exp.get("id", "run"),
        network=model,
        network_params=tuple(sorted(params.items())),
        delta=grid.get("delta", "1/4"),
        lam=grid.get("lambda", "1/2"),
        w_in=_value(weights.get("w_in", "1")),
        w_out=_value(weights.get("w_out", "1")),
        b=b,
        b_tilde=b_tilde,
        init=init,
        update=exp.get("update", "sync"),
        max_steps=int(exp.get("max_steps", "1000")),
        n_p=int(exp.get("trials", "100")),
        base_seed=int(exp.get("seed", "0")),
        partition_rule=net.get("partition", "auto"),
    )

    axis = None
    if "sweep" in parser:
        sweep_sec = parser["sweep"]
        target = sweep_sec.get("axis")
        values = _value_list(sweep_sec.get("values", ""))
        # An empty value list is a legal degenerate sweep (header-only CSV).
        axis = [_axis_override(target, model, v) for v in values]
    return RunConfig(spec, axis, init_values)


def _axis_override(target: str | None, model: str, value: float) -> dict:
    if target is None:
        raise ConfigError("[sweep] needs an axis key")
    if target.startswith("network."):
        key = target.split(".", 1)[1]
        if key not in _NETWORK_KEYS[model]:
            raise ConfigError(f"axis {target!r} is not a {model} parameter")
        if key in _INT_PARAMS:
            value = int(value)
        return {"network_params": {key: value}}
    if target not in _AXIS_TARGETS:
        raise ConfigError(f"unknown sweep axis {target!r}")
    if target == "media.b_tilde":
        return {"b_tilde": value, "b": None}
    if target == "media.b":
        return {"b": value, "b_tilde": None}
    if target == "weights.w_in":
        return {"w_in": value}
    if target == "weights.w_out":
        return {"w_out": value}
    return {"init": harness.fixed_mean(value)}


#: Bundled reproduction presets; multi-file presets are paired or per-series
#: sweeps that belong on one figure.
PRESETS: dict[str, tuple[str, ...]] = {
    "prop1": ("prop1.ini",),
    "async-example": ("async-example.ini",),
    "fig1-desk": ("fig1-desk-a.ini", "fig1-desk-b.ini"),
    "fig1-paper": ("fig1-paper-a.ini", "fig1-paper-b.ini"),
    "fig2-desk": ("fig2-desk-h1.ini", "fig2-desk-h4.ini", "fig2-desk-h8.ini"),
    "fig2-paper": ("fig2-paper-h1.ini", "fig2-paper-h4.ini", "fig2-paper-h8.ini"),
    "fig3-desk": ("fig3-desk.ini",),
    "fig3-paper": ("fig3-paper.ini",),
    "fig4-desk": ("fig4-desk.ini",),
    "fig4-paper": ("fig4-paper.ini",),
    "fig5-desk": ("fig5-desk.ini",),
    "fig5-paper": ("fig5-paper.ini",),
    "fig6-desk": ("fig6-desk-h1.ini", "fig6-desk-h4.ini", "fig6-desk-h8.ini"),
    "fig6-paper": ("fig6-paper-h1.ini", "fig6-paper-h4.ini", "fig6-paper-h8.ini"),
}


def preset_paths(name: str) -> list[str]:
    """Filesystem paths of a bundled preset's config files."""
    if name not in PRESETS:
        known = ", ".join(sorted(PRESETS))
        raise ConfigError(f"unknown preset {name!r}; known presets: {known}")
    base = resources.files("opdyn") / "presets"
    return [str(base / fname) for fname in PRESETS[name]]
