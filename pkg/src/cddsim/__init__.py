"""Monte Carlo simulator of modulated continuous driving for a two-level spin
under Ornstein-Uhlenbeck noise, with an I/Q waveform compiler."""

__version__ = "0.1.0"

from .spincore import (BlochVector, PauliVector, SpinState, fidelity,
                       propagate_step, state_along, to_bloch)
from .noise import (AmplitudeNoiseSpec, HyperfineEnsemble, OuProcess, ou_path,
                    ou_step, ou_stream, sample_detuning, stationary_sigma)
from .drive import (AmpMod, DoubleDrive, DriveScheme, IqWaveform,
                    LabFrameParams, PhaseMod, SingleDrive, alpha_of,
                    compile_iq, iq_values, lab_frame_hamiltonian, omega2_mhz,
                    phase_waveform, rotating_frame_hamiltonian)
from .evolve import (DecoherenceCurve, SimulationConfig, Trajectory,
                     ensemble_curve, fid_curve, hahn_echo_curve,
                     simulate_trajectory, verify_rwa, verify_second_frame)
from .analysis import (AlphaScanResult, DecayFit, FitFailure,
                       SchemeComparison, beat_average, compare_schemes,
                       contrast, fit_decay, scan_alpha)
from .config import ConfigError, load_config

__all__ = [
    "SpinState", "PauliVector", "BlochVector", "state_along",
    "propagate_step", "to_bloch", "fidelity",
    "OuProcess", "AmplitudeNoiseSpec", "HyperfineEnsemble", "ou_step",
    "ou_stream", "ou_path", "sample_detuning", "stationary_sigma",
    "SingleDrive", "PhaseMod", "AmpMod", "DoubleDrive", "DriveScheme",
    "LabFrameParams", "IqWaveform", "alpha_of", "omega2_mhz",
    "phase_waveform", "iq_values", "rotating_frame_hamiltonian",
    "lab_frame_hamiltonian", "compile_iq",
    "SimulationConfig", "DecoherenceCurve", "Trajectory",
    "simulate_trajectory", "ensemble_curve", "fid_curve", "hahn_echo_curve",
    "verify_rwa", "verify_second_frame",
    "DecayFit", "FitFailure", "AlphaScanResult", "SchemeComparison",
    "fit_decay", "contrast", "scan_alpha", "compare_schemes", "beat_average",
    "ConfigError", "load_config",
]
