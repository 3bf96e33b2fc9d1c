"""terradeform: real-time style two-way coupling between a walking
character and viscoplastic soft grounds, as a deterministic headless
library plus a scenario-runner CLI."""

from .character import (CharacterState, ContactEvent, FootState, GaitParams,
                        GaitPlanner, capsule_transverse_inertia,
                        controller_torque, gait_targets, pd_torque, place_feet,
                        step_rigid_body)
from .config import (ConfigError, ScenarioConfig, apply_overrides,
                     default_config, impact_speed, parse_config,
                     parse_config_file)
from .contact import (ContactPatch, FootCollider, SphereCollider,
                      contact_window, contour_cells, detect_hits)
from .deformation import (FootprintJob, displaced_volume, frame_accumulation,
                          frame_compression, target_accumulation,
                          target_compression)
from .forces import (GRAVITY, FootForces, ForceBreakdown, ImpulseWindow,
                     SupportRatio, foot_force, ground_reaction, impact_impulse,
                     momentum_force, normal_stress, weight_forces, weight_ratio)
from .heightfield import (CellIndex, Heightfield, from_pgm, gaussian_blur,
                          new_heightfield, to_pgm)
from .materials import MaterialParams, PRESETS, preset, validate
from .simulation import (FootprintSummary, OutputSinks, RunReport, Simulation)
from .scenarios import (run_bench, run_gallery, run_scenario, run_sphere_drop,
                        run_stand, run_slope_walk, run_walk, run_walk_grf)

__version__ = "0.1.0"
