import logging
from itertools import combinations
from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Circle, Rectangle

from ..core.trajectory import Trajectory
from ..scenarios.geometry import Box, Disk, Role, Segment
from ..scenarios.scenario import Scenario

logger = logging.getLogger(__name__)

# Fixed salt and no date keep the SVG output byte-identical across runs.
PARAMS = {
    "svg.hashsalt": "pyreachavoid",
    "svg.fonttype": "none",
    "font.size": 9,
    "font.family": "sans-serif",
    "figure.figsize": (6.0, 6.0),
    "axes.spines.top": False,
    "axes.spines.right": False,
}

ROLE_COLOURS = {Role.TARGET: "tab:green", Role.FAILURE: "0.2", Role.BOUNDARY: "0.5"}
AGENT_COLOURS = ("tab:blue", "tab:orange", "tab:purple", "tab:brown", "tab:pink", "tab:olive")
ADVERSARIAL, COOPERATIVE = "tab:red", "tab:green"


def _draw_geometry(ax, geometry) -> None:
    for shape in geometry:
        colour = ROLE_COLOURS[shape.role]
        if isinstance(shape, Disk):
            ax.add_patch(Circle(shape.center, shape.radius, color=colour,
                                alpha=0.3 if shape.role is Role.TARGET else 0.8, linewidth=0))
        elif isinstance(shape, Box):
            ax.add_patch(Rectangle(shape.corner, 2 * shape.half_extents[0], 2 * shape.half_extents[1],
                                   color=colour, alpha=0.25, linewidth=0))
        elif isinstance(shape, Segment):
            style = "--" if shape.label == "center_line" else "-"
            ax.plot([shape.start[0], shape.stop[0]], [shape.start[1], shape.stop[1]], style,
                    color=colour, linewidth=1.0)


def _draw_path(ax, xy: np.ndarray, colour: str, label: Optional[str], t_switch: Optional[int] = None) -> None:
    if t_switch is None or not 0 < t_switch < len(xy):
        ax.plot(xy[:, 0], xy[:, 1], "-", color=colour, linewidth=1.2, label=label)
    else:
        ax.plot(xy[:t_switch + 1, 0], xy[:t_switch + 1, 1], "-", color=ADVERSARIAL, linewidth=1.2,
                label=f"{label} (adversarial)" if label else None)
        ax.plot(xy[t_switch:, 0], xy[t_switch:, 1], "-", color=COOPERATIVE, linewidth=1.2,
                label=f"{label} (cooperative)" if label else None)
    ax.plot(xy[0, 0], xy[0, 1], "o", color=colour, markersize=3)


def _annotate_close_approaches(ax, traj: Trajectory, positions, within: float) -> None:
    for a, b in combinations(range(len(positions)), 2):
        pa, pb = traj.states[:, list(positions[a])], traj.states[:, list(positions[b])]
        distances = np.linalg.norm(pa - pb, axis=1)
        k = int(np.argmin(distances))
        if distances[k] > within:
            continue
        ax.plot([pa[k, 0], pb[k, 0]], [pa[k, 1], pb[k, 1]], "--", color="0.3", linewidth=0.8)
        ax.annotate(f"t={traj.time(k) * traj.dt:.1f}s", xy=(0.5 * (pa[k, 0] + pb[k, 0]), 0.5 * (pa[k, 1] + pb[k, 1])),
                    fontsize=7, color="0.3")


def emit_plot(trajectories: Sequence[Trajectory], scenario: Scenario, output: Union[str, Path],
              annotate_within: Optional[float] = None) -> Path:
    """
    Planar paths of every agent over the scenario geometry, saved as SVG.

    Close approaches between agents closer than annotate_within are drawn
    as dashed lines with their timestamp. With a reaction time in the
    scenario metadata, the second agent's path is split into its
    adversarial and cooperative phases.
    """
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    system = scenario.system
    positions = [system.position_indices(agent) for agent in range(len(system.subsystems))]
    t_react = scenario.metadata.get("t_react")

    with plt.rc_context(PARAMS):
        fig, ax = plt.subplots()
        if scenario.geometry:
            _draw_geometry(ax, scenario.geometry)
        else:
            logger.warning(f"Scenario {scenario.name} has no geometry; plotting paths only")
        for n, traj in enumerate(trajectories):
            for agent, index in enumerate(positions):
                xy = traj.states[:, list(index)]
                label = system.names[agent] if n == 0 else None
                switch = None if t_react is None or agent != 1 else t_react - traj.t0
                _draw_path(ax, xy, AGENT_COLOURS[agent % len(AGENT_COLOURS)], label, switch)
            if annotate_within is not None:
                _annotate_close_approaches(ax, traj, positions, annotate_within)
        ax.set_aspect("equal", adjustable="datalim")
        ax.autoscale_view()
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        ax.set_title(scenario.name)
        if trajectories and len(trajectories) <= 3:
            ax.legend(loc="best", fontsize=7, frameon=False)
        fig.savefig(output, format="svg", metadata={"Date": None})
        plt.close(fig)
    logger.info(f"Wrote plot {output}")
    return output
