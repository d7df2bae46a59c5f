"""Secrecy-rate design for cooperative NOMA hybrid VLC/RF relaying.

Two entrusted users under a VLC access point decode a third user's message
and forward it over RF using harvested power, while an eavesdropper listens.
"""
from .channels import (ChannelSet, Geometry, Position3D, RfModel, VlcFrontEnd, lambertian_gain,
                       rf_path_loss_db, sample_rf_channel, sample_scenario)
from .config import ScenarioConfig, load_config
from .errors import (ConfigError, GeometryError, HybridSecError, QosInfeasibleError, SolverError,
                     SweepError)
from .known_csi import KnownCsiConfig, KnownCsiSolution, solve_known_csi, zf_beamformer
from .link import (EnergyHarvestParams, PowerAllocation, RateBundle, SystemParams,
                   VlcSystemConstants, check_feasibility, harvested_power, noma_rates,
                   rf_secrecy_rate)
from .sdp import BeamformerSolution, SdpOutcome, solve_an_power_sdp, solve_secrecy_cc_sdp
from .sweep import CurveTable, read_csv, run_sweep, write_csv
from .unknown_csi import (UnknownCsiConfig, UnknownCsiSolution, expected_secrecy_rate,
                          solve_unknown_csi)

__version__ = "0.1.0"
