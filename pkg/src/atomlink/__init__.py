"""atomlink: heralded atom-photon entanglement capture and teleportation simulator.

Submodules:
    qcore     exact state-vector algebra over labeled qudit spaces
    atomics   rubidium level model, Raman pulses, Bell-basis utilities
    teleport  teleportation pipeline with sequential-elimination measurement
    linkmath  closed-form link-budget arithmetic
    capture   Monte-Carlo capture campaigns
    kernels   compiled/pure hot-loop backends
    cli       command-line front end (budget | capture | teleport)
"""

from .atomics import AtomLevel, BellOutcome, OscillatorFrame, PulseSpec
from .capture import CampaignStats, ExhaustedError, TrialRecord
from .linkmath import LinkBudget
from .qcore import Operator, SpaceLabel, StateVector
from .teleport import DetectorModel, TeleportRecord

__version__ = "0.1.0"

__all__ = [
    "AtomLevel",
    "BellOutcome",
    "CampaignStats",
    "DetectorModel",
    "ExhaustedError",
    "LinkBudget",
    "Operator",
    "OscillatorFrame",
    "PulseSpec",
    "SpaceLabel",
    "StateVector",
    "TeleportRecord",
    "TrialRecord",
    "__version__",
]
