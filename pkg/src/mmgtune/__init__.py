"""Fine-tuning of MMG ship-maneuvering coefficients from trial time series."""

from .dynamics import Trajectory, euler_step, simulate, turning_circle
from .mmg import AugmentedState, ControlInput, ForceTriple, MmgParams, ShipParticulars, State
from .optimizer import BoxConstraint, CmaConfig, OptResult, cmaes_minimize_with_restarts
from .trials import DatasetSplit, ManeuverSpec, NoiseModel, Trial, load_trial, save_trial
from .tuning import MMGParameterTuner, ParamSelector, TuningSpec, evaluate, tune

__version__ = "0.1.0"

__all__ = [
    "AugmentedState", "BoxConstraint", "CmaConfig", "ControlInput", "DatasetSplit", "ForceTriple",
    "MMGParameterTuner", "ManeuverSpec", "MmgParams", "NoiseModel", "OptResult", "ParamSelector",
    "ShipParticulars", "State", "Trajectory", "Trial", "TuningSpec", "cmaes_minimize_with_restarts",
    "euler_step", "evaluate", "load_trial", "save_trial", "simulate", "tune", "turning_circle",
]
