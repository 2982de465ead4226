"""Window placement geometry.

Metric semicircle layout for 3D-style frontends, branch-placement
strategies, and the 2D desktop column layout in pixels. Everything here is
a pure function of its inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .model import Notebook

STRATEGIES = ("orthogonal", "grid", "column")


class LayoutError(Exception):
    pass


class OverflowSpan(LayoutError):
    """Requested windows do not fit the angular span."""

    def __init__(self, required_span: float, max_span: float):
        super().__init__(
            f"required span {required_span:.6g} rad exceeds max span "
            f"{max_span:.6g} rad"
        )
        self.required_span = required_span
        self.max_span = max_span


class UnknownStrategy(LayoutError):
    pass


@dataclass(frozen=True)
class LayoutConfig:
    radius: float
    window_width: float
    window_height: float = 0.30
    gap: float = 0.0
    max_span: float = math.pi
    eye_height: float = 1.2
    allow_overflow: bool = False

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.window_width <= 0:
            raise ValueError("window_width must be positive")
        if self.gap < 0:
            raise ValueError("gap must be non-negative")
        if not 0 < self.max_span <= 2 * math.pi:
            raise ValueError("max_span must be in (0, 2*pi]")


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    z: float
    yaw: float


@dataclass(frozen=True)
class DesktopRect:
    x: int
    y: int
    width: int
    height: int
    column: int


@dataclass(frozen=True)
class PixelConfig:
    window_w: int = 2000
    window_h: int = 600
    vgap: int = 40
    hgap: int = 40


def semicircle(cfg: LayoutConfig, n: int) -> list[Pose]:
    """Arc-length spaced poses on a circle of cfg.radius around the viewer.

    Angular step is (window_width + gap) / radius; windows are centered
    about the forward (+z) axis and yawed to face the origin. Raises
    OverflowSpan when n windows need more than cfg.max_span radians, unless
    cfg.allow_overflow is set.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    step = (cfg.window_width + cfg.gap) / cfg.radius
    required = n * step
    if required > cfg.max_span and not cfg.allow_overflow:
        raise OverflowSpan(required, cfg.max_span)
    poses = []
    for i in range(n):
        theta = (i - (n - 1) / 2) * step
        poses.append(
            Pose(
                x=cfg.radius * math.sin(theta),
                y=cfg.eye_height,
                z=cfg.radius * math.cos(theta),
                yaw=theta,
            )
        )
    return poses


def branch_poses(
    strategy: str,
    base: Pose,
    group_size: int,
    spacing: float,
    window_height: float = 0.30,
) -> list[Pose]:
    """Place a group's k alternative windows relative to the base pose.

    orthogonal: siblings recede along the origin->base ray, step `spacing`.
    grid: row-major fill, row width ceil(sqrt(k)); columns step `spacing`
    along the tangent, rows step `spacing` downward.
    column: vertical stack below base, step window_height + spacing.
    """
    if group_size < 1:
        raise ValueError("group_size must be >= 1")
    if strategy not in STRATEGIES:
        raise UnknownStrategy(f"unknown strategy '{strategy}'")

    poses = []
    if strategy == "orthogonal":
        norm = math.hypot(base.x, base.z)
        if norm > 0:
            ux, uz = base.x / norm, base.z / norm
        else:
            ux, uz = math.sin(base.yaw), math.cos(base.yaw)
        for j in range(group_size):
            d = j * spacing
            poses.append(Pose(base.x + d * ux, base.y, base.z + d * uz, base.yaw))
    elif strategy == "grid":
        row_width = math.ceil(math.sqrt(group_size))
        # tangent is the horizontal direction perpendicular to the radial
        tx, tz = math.cos(base.yaw), -math.sin(base.yaw)
        for j in range(group_size):
            col, row = j % row_width, j // row_width
            poses.append(
                Pose(
                    base.x + col * spacing * tx,
                    base.y - row * spacing,
                    base.z + col * spacing * tz,
                    base.yaw,
                )
            )
    else:  # column
        for j in range(group_size):
            poses.append(
                Pose(
                    base.x,
                    base.y - j * (window_height + spacing),
                    base.z,
                    base.yaw,
                )
            )
    return poses


def desktop_layout(
    nb: Notebook, px_cfg: PixelConfig = PixelConfig()
) -> dict[str, DesktopRect]:
    """Pixel rects: main chain stacked in column 0, siblings fanning out.

    Alternative j of a stage goes to column 0, +1, -1, +2, -2, ... at the
    stage's row; column c sits at x = c * (window_w + hgap).
    """
    rects: dict[str, DesktopRect] = {}
    for si, stage in enumerate(nb.stages):
        y = si * (px_cfg.window_h + px_cfg.vgap)
        for j, window in enumerate(stage.alternatives):
            if j == 0:
                col = 0
            else:
                col = (j + 1) // 2 * (1 if j % 2 == 1 else -1)
            rects[window.id] = DesktopRect(
                x=col * (px_cfg.window_w + px_cfg.hgap),
                y=y,
                width=px_cfg.window_w,
                height=px_cfg.window_h,
                column=col,
            )
    return rects
