from .config import BEHAVIORS, Partition, SimConfig, default_iterations
from .engine import RoundStats, SimRun, assign_byzantine, default_checkpoint, fake_vector, run_simulation
from .topology import ConfigError, NetworkTopology, generate_topology

__all__ = [
    "BEHAVIORS",
    "ConfigError",
    "NetworkTopology",
    "Partition",
    "RoundStats",
    "SimConfig",
    "SimRun",
    "assign_byzantine",
    "default_checkpoint",
    "default_iterations",
    "fake_vector",
    "generate_topology",
    "run_simulation",
]
