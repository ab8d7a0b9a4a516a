from .client import TrajectoryClient
