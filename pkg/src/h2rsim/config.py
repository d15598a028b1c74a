"""Run configuration: TOML-style config files mirroring the module configs.

Angles are configured in degrees (hand-editable), converted to radians when
the typed configs are built. Seeds are mandatory — there is no wall-clock
default, so every run is reproducible by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

from .demos import SamplerConfig, TrajectoryConfig
from .errors import ParseError
from .render import CameraIntrinsics
from .rollout import EpisodeConfig, IbvsGains, LossWeights


@dataclass
class RunConfig:
    seed: int
    scene: str
    grasps: str
    d_s: float = 0.1
    # sampler
    k: int = 15
    r: float = 0.7
    alpha_min_deg: float = 60.0
    theta_offset_deg: float = 20.0
    theta_max_deg: float = 100.0
    # trajectory
    s: float = 0.3
    d: float = 0.5
    phi_deg: float = 0.0
    d_min: float = 0.1
    traj_max_steps: int = 30
    step_translation: float = 0.05
    step_rotation_deg: float = 10.0
    # episode
    tau_c: float = 0.7
    episode_max_steps: int = 30
    success_band_low: float = 0.35
    success_band_high: float = 0.45
    center_angle_max_deg: float = 10.0
    # camera
    fx: float = 525.0
    fy: float = 525.0
    cx: float = 320.0
    cy: float = 240.0
    width: int = 640
    height: int = 480
    near: float = 0.05
    # loss
    lambda_t: float = 100.0
    lambda_r: float = 100.0
    # ibvs baseline
    ibvs_gain: float = 0.001
    ibvs_advance: float = 0.04
    ibvs_area_threshold: float = 0.15

    def sampler_config(self) -> SamplerConfig:
        return SamplerConfig(k=self.k, r=self.r,
                             alpha_min=math.radians(self.alpha_min_deg),
                             theta_offset_range=math.radians(self.theta_offset_deg),
                             theta_max=math.radians(self.theta_max_deg),
                             seed=self.seed)

    def trajectory_config(self) -> TrajectoryConfig:
        return TrajectoryConfig(s=self.s, d=self.d,
                                phi=math.radians(self.phi_deg),
                                d_min=self.d_min,
                                max_steps=self.traj_max_steps,
                                step_translation=self.step_translation,
                                step_rotation=math.radians(self.step_rotation_deg))

    def episode_config(self) -> EpisodeConfig:
        return EpisodeConfig(tau_c=self.tau_c, max_steps=self.episode_max_steps,
                             success_band=(self.success_band_low,
                                           self.success_band_high),
                             center_angle_max=math.radians(self.center_angle_max_deg),
                             d_s=self.d_s,
                             step_translation=self.step_translation,
                             step_rotation=math.radians(self.step_rotation_deg))

    def camera(self) -> CameraIntrinsics:
        return CameraIntrinsics(fx=self.fx, fy=self.fy, cx=self.cx, cy=self.cy,
                                width=self.width, height=self.height,
                                near=self.near)

    def loss_weights(self) -> LossWeights:
        return LossWeights(lambda_t=self.lambda_t, lambda_r=self.lambda_r)

    def ibvs_gains(self) -> IbvsGains:
        return IbvsGains(gain=self.ibvs_gain, advance=self.ibvs_advance,
                         area_threshold=self.ibvs_area_threshold)


# section -> config keys; every RunConfig field appears exactly once.
_SCHEMA = {
    "run": ("seed", "scene", "grasps"),
    "safety": ("d_s",),
    "sampler": ("k", "r", "alpha_min_deg", "theta_offset_deg", "theta_max_deg"),
    "trajectory": ("s", "d", "phi_deg", "d_min", "traj_max_steps",
                   "step_translation", "step_rotation_deg"),
    "episode": ("tau_c", "episode_max_steps", "success_band_low",
                "success_band_high", "center_angle_max_deg"),
    "camera": ("fx", "fy", "cx", "cy", "width", "height", "near"),
    "loss": ("lambda_t", "lambda_r"),
    "ibvs": ("ibvs_gain", "ibvs_advance", "ibvs_area_threshold"),
}

_REQUIRED = ("seed", "scene", "grasps")


def _parse_value(raw: str, path, lineno: int):
    raw = raw.strip()
    if raw.startswith('"'):
        if not raw.endswith('"') or len(raw) < 2:
            raise ParseError(f"{path}:{lineno}: unterminated string")
        return raw[1:-1]
    if raw in ("true", "false"):
        return raw == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError as e:
        raise ParseError(f"{path}:{lineno}: cannot parse value {raw!r}") from e


def _strip_comment(line: str) -> str:
    out = []
    in_string = False
    for ch in line:
        if ch == '"':
            in_string = not in_string
        if ch == "#" and not in_string:
            break
        out.append(ch)
    return "".join(out)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as e:
        raise ParseError(f"cannot read config {path}: {e}") from e
    field_types = {f.name: f.type for f in fields(RunConfig)}
    key_section = {k: s for s, keys in _SCHEMA.items() for k in keys}
    values: dict[str, object] = {}
    section = None
    for lineno, line in enumerate(raw.splitlines(), start=1):
        line = _strip_comment(line).strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ParseError(f"{path}:{lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'key = value'")
        key, _, rhs = line.partition("=")
        key = key.strip()
        if section is None:
            raise ParseError(f"{path}:{lineno}: key {key!r} outside any section")
        if key_section.get(key) != section:
            raise ParseError(f"{path}:{lineno}: unknown key {key!r} in [{section}]")
        if key in values:
            raise ParseError(f"{path}:{lineno}: duplicate key {key!r}")
        val = _parse_value(rhs, path, lineno)
        want = field_types[key]
        if want in ("int", int):
            if isinstance(val, bool) or not isinstance(val, int):
                raise ParseError(f"{path}:{lineno}: {key!r} must be an integer")
        elif want in ("float", float):
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ParseError(f"{path}:{lineno}: {key!r} must be a number")
            val = float(val)
        elif want in ("str", str):
            if not isinstance(val, str):
                raise ParseError(f"{path}:{lineno}: {key!r} must be a string")
        values[key] = val
    for key in _REQUIRED:
        if key not in values:
            raise ParseError(f"{path}: missing required key {key!r} "
                             f"(seeds and paths are mandatory)")
    try:
        return RunConfig(**values)
    except TypeError as e:
        raise ParseError(f"{path}: {e}") from e


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, float):
        return repr(v)
    return str(v)


def save_config(cfg: RunConfig, path) -> None:
    lines = []
    for section, keys in _SCHEMA.items():
        lines.append(f"[{section}]")
        for key in keys:
            lines.append(f"{key} = {_format_value(getattr(cfg, key))}")
        lines.append("")
    Path(path).write_text("\n".join(lines))
