"""Configuration dataclasses and the desk/paper scale profiles.

Everything that tunes behavior lives here rather than in module code:
obstacle size ranges, policy gains, integrator constants, network widths,
and training schedules. ``desk`` is small enough for a laptop CPU; ``paper``
matches the full-scale setup.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

from .errors import UsageError


@dataclass
class GenConfig:
    """Procedural world generation parameters (meters)."""

    bounds_min: tuple = (0.0, 0.0, 0.0)
    bounds_max: tuple = (10.0, 10.0, 10.0)
    sphere_radius: tuple = (0.3, 1.0)
    box_half_extent: tuple = (0.3, 1.0)
    wall_thickness: float = 0.1
    wall_extent: tuple = (1.0, 4.0)  # full in-plane edge lengths
    sphere_box_cap: int = 200
    plane_cap: int = 100
    clearance: float = 0.3  # free-space margin for sampled start/goal points
    sample_attempts: int = 4000


@dataclass
class RmpConfig:
    """Obstacle and goal policy constants."""

    eta_rep: float = 8.0
    eta_damp: float = 2.0
    nu_rep: float = 1.0
    metric_vel_gain: float = 2.0  # extra metric weight per m/s of approach speed
    alpha_g: float = 1.0
    beta_g: float = 2.0
    softnorm_c: float = 0.1


@dataclass
class RolloutParams:
    """Integrator and termination constants."""

    dt: float = 0.05
    max_steps: int = 2000
    goal_radius: float = 0.25
    v_max: float = 1.5
    stuck_window: int = 100
    stuck_speed: float = 0.02
    collision_margin: float = 0.05
    ray_offset: float = 0.0  # subtracted from all ray distances (robot radius)

    def validate(self):
        for name in ("dt", "max_steps", "goal_radius", "v_max", "stuck_window",
                     "stuck_speed", "collision_margin"):
            if getattr(self, name) <= 0:
                raise UsageError(f"rollout parameter {name} must be positive")
        if self.stuck_window >= self.max_steps:
            raise UsageError("stuck_window must be smaller than max_steps")


@dataclass
class RayConfig:
    n_rays: int = 1024
    max_range: float = 5.0
    noise_floor: float = 0.01  # clamp for noisy distances, keeps repulsors finite


@dataclass
class NetworkConfig:
    """Architecture description; decoder width always equals n_rays."""

    n_rays: int = 1024
    ray_encoder: tuple = (512, 256)
    goal_encoder: tuple = (64,)
    bottleneck_width: int = 320
    bottleneck_layers: int = 4
    use_lstm: bool = False
    lstm_width: int = 320
    k_top: int = 50
    leaky_slope: float = 0.01
    ln_eps: float = 1e-5

    def validate(self):
        if self.k_top > self.n_rays:
            raise UsageError("k_top must not exceed n_rays")
        if self.use_lstm and self.lstm_width != self.bottleneck_width:
            raise UsageError("lstm_width must equal bottleneck_width (residual insertion)")


@dataclass
class TrainConfig:
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 256
    epochs: int = 40
    val_fraction: float = 0.1  # split by world, never by sample


@dataclass
class DaggerConfig:
    iterations: int = 20
    rollouts_per_iter: int = 50
    worlds_per_iter: int = 10  # rollouts are grouped on shared worlds to amortize fields
    epochs_per_iter: int = 5
    bptt_window: int = 64
    collect_max_steps: int = 400
    val_fraction: float = 0.1
    lstm_init_scale: float = 0.05


@dataclass
class DatasetConfig:
    n_worlds: int = 6400
    samples_per_world: int = 1024
    world_mix: tuple = (("sphere_box", 0.5), ("plane", 0.5))
    cell_size: float = 0.1
    min_obstacle_frac: float = 0.05  # obstacle count drawn in [frac*cap, cap]


@dataclass
class BenchConfig:
    runs: int = 100
    sphere_box_densities: tuple = (0, 40, 80, 120, 160, 200)
    plane_densities: tuple = (0, 20, 40, 60, 80, 100)
    sigmas: tuple = (0.0,)
    min_separation: float = 3.0
    require_no_los: bool = True
    cell_size: float = 0.1  # geodesic field resolution for the expert planner
    world_attempts: int = 20  # fresh worlds tried when start/goal sampling fails


@dataclass
class Config:
    profile: str = "paper"
    seed: int = 0
    gen: GenConfig = field(default_factory=GenConfig)
    rmp: RmpConfig = field(default_factory=RmpConfig)
    rollout: RolloutParams = field(default_factory=RolloutParams)
    rays: RayConfig = field(default_factory=RayConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    dagger: DaggerConfig = field(default_factory=DaggerConfig)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.to_dict(), sort_keys=True).encode()
        ).hexdigest()[:16]


def paper_profile(seed: int = 0) -> Config:
    return Config(profile="paper", seed=seed)


def desk_profile(seed: int = 0) -> Config:
    """Laptop-scale preset: every learned width >= 128 divided by 4.

    The decoder width always equals the ray count, so the desk profile also
    runs with 256 rays.
    """
    cfg = Config(profile="desk", seed=seed)
    cfg.rays = RayConfig(n_rays=256)
    cfg.network = NetworkConfig(
        n_rays=256,
        ray_encoder=(128, 64),
        goal_encoder=(64,),
        bottleneck_width=80,
        bottleneck_layers=4,
        lstm_width=80,
    )
    cfg.dataset = DatasetConfig(n_worlds=200, samples_per_world=256)
    cfg.bench = BenchConfig(runs=30)
    return cfg


_PROFILES = {"paper": paper_profile, "desk": desk_profile}


def load_profile(name: str, seed: int = 0) -> Config:
    if name not in _PROFILES:
        raise UsageError(f"unknown profile {name!r}; expected one of {sorted(_PROFILES)}")
    return _PROFILES[name](seed)


def _apply_overrides(obj, overrides: dict, path: str = ""):
    for key, value in overrides.items():
        if not hasattr(obj, key):
            raise UsageError(f"unknown config key {path + key!r}")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current) and isinstance(value, dict):
            _apply_overrides(current, value, path + key + ".")
        else:
            if isinstance(current, tuple) and isinstance(value, list):
                value = tuple(tuple(v) if isinstance(v, list) else v for v in value)
            setattr(obj, key, value)


def load_config(path: str | None, profile: str = "desk", seed: int = 0) -> Config:
    """Profile preset, optionally overridden from a JSON file."""
    cfg = load_profile(profile, seed)
    if path is not None:
        with open(path) as fh:
            try:
                overrides = json.load(fh)
            except json.JSONDecodeError as e:
                raise UsageError(f"config file {path}: {e}") from e
        _apply_overrides(cfg, overrides)
    return cfg
