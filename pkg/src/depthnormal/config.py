"""Tunables shared by the geometric modules, the propagator and the metrics."""
import json
import math
from dataclasses import asdict, dataclass, fields

from .errors import ConfigError


@dataclass(frozen=True)
class GeoConfig:
    alpha: float = 0.95        # cosine-similarity gate for coplanar votes
    beta: int = 9              # window half-extent, strict: |du| < beta
    gamma: float = 0.05        # relative depth gate for plane fitting
    t_prop: int = 3            # four-sweep cascades per propagation
    iterations: int = 2        # outer refinement repetitions
    ridge_eps: float = 1e-12   # Tikhonov scale relative to trace(AᵀA)/3
    blend_w: float = 0.5       # weight on the geometric estimate
    base_w: float = 0.7        # off-edge propagation weight
    canny_low: float | None = None   # None -> per-image mean intensity
    canny_high: float | None = None  # None -> 2 × per-image mean
    recursive_within_pass: bool = True
    tv_strength: float = 0.1
    tv_iters: int = 30

    def __post_init__(self):
        def num(name, integer=False):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{name} must be a number, got {value!r}")
            if integer:
                if float(value) != int(value):
                    raise ConfigError(f"{name} must be an integer, got {value!r}")
                object.__setattr__(self, name, int(value))
            elif not math.isfinite(value):
                raise ConfigError(f"{name} must be finite")
            return getattr(self, name)

        if not 0 < num("alpha") < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if num("beta", True) < 1:
            raise ConfigError(f"beta must be >= 1, got {self.beta}")
        if not 0 < num("gamma") < 1:
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")
        if num("t_prop", True) < 1:
            raise ConfigError(f"t_prop must be >= 1, got {self.t_prop}")
        if num("iterations", True) < 1:
            raise ConfigError(f"iterations must be >= 1, got {self.iterations}")
        if num("ridge_eps") < 0:
            raise ConfigError(f"ridge_eps must be >= 0, got {self.ridge_eps}")
        if not 0 <= num("blend_w") <= 1:
            raise ConfigError(f"blend_w must lie in [0, 1], got {self.blend_w}")
        if not 0 <= num("base_w") <= 1:
            raise ConfigError(f"base_w must lie in [0, 1], got {self.base_w}")
        if num("tv_strength") < 0:
            raise ConfigError(f"tv_strength must be >= 0, got {self.tv_strength}")
        if num("tv_iters", True) < 1:
            raise ConfigError(f"tv_iters must be >= 1, got {self.tv_iters}")
        for name in ("canny_low", "canny_high"):
            if getattr(self, name) is not None:
                num(name)
        if self.canny_low is not None and self.canny_high is not None and self.canny_low > self.canny_high:
            raise ConfigError("canny_low must not exceed canny_high")
        if not isinstance(self.recursive_within_pass, bool):
            raise ConfigError("recursive_within_pass must be a boolean")

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path):
        if path is None:
            return cls()
        with open(path) as f:
            return cls.from_dict(json.load(f))

    def replace(self, **changes):
        return type(self)(**{**asdict(self), **changes})

    def to_dict(self):
        return asdict(self)
