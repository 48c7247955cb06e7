"""Run configuration: plain ``key = value`` files with ``#`` comments."""

from dataclasses import asdict, dataclass, fields

from .errors import ConfigError


@dataclass
class RunConfig:
    # data
    dataset: str = "synthetic"      # "synthetic" or a directory of .bvh files
    styles: int = 10
    clips: int = 8
    frames: int = 600
    seed: int = 0
    # phase autoencoder
    phase_channels: int = 5
    phase_window: int = 61
    phase_steps: int = 800
    # manifold
    latent: int = 32
    experts: int = 4
    manifold_hidden: int = 128
    beta: float = 1e-3
    manifold_window: int = 25
    manifold_steps: int = 600
    # sampler
    lstm_hidden: int = 128
    min_length: int = 20
    max_length: int = 40
    epochs: int = 10
    steps_per_epoch: int = 150
    batch: int = 32
    lr: float = 1e-3
    style_weight_decay: float = 1e-4
    # few-shot fine-tuning
    finetune_epochs: int = 3
    finetune_steps: int = 20
    # evaluation
    classifier_steps: int = 300
    eval_pairs: int = 32
    diversity_samples: int = 10
    diversity_pairs: int = 4

    def replace(self, **kw):
        data = asdict(self)
        for k, v in kw.items():
            if k not in data:
                raise ConfigError(f"unknown config key '{k}'")
            data[k] = v
        return RunConfig(**data)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def coerce(key, value):
    """Convert a text value to the declared type of ``key``."""
    if key not in _TYPES:
        raise ConfigError(f"unknown config key '{key}'")
    typ = _TYPES[key]
    typ = {"int": int, "float": float, "str": str}.get(typ, typ)
    try:
        if typ is int:
            return int(value)
        if typ is float:
            return float(value)
        return str(value)
    except ValueError as e:
        raise ConfigError(f"bad value for '{key}': {value!r}") from e


def parse_config(text):
    """Key/value pairs from config text, typed and validated."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = coerce(key, value)
    return out


def load_config(path=None, overrides=None):
    """Defaults, then the file at ``path``, then ``overrides`` (``key=value`` strings)."""
    values = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            values.update(parse_config(fh.read()))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        k, v = (s.strip() for s in item.split("=", 1))
        values[k] = coerce(k, v)
    return RunConfig().replace(**values)


def dump_config(cfg):
    return "".join(f"{k} = {v}\n" for k, v in asdict(cfg).items())
