"""Event-driven simulator for the infinity-parent spatial Lambda-Fleming-Viot
growth process, with estimators for its front speed, geodesic fluctuations,
front-bulk gap, self-duality, and ball-shape asymptotics."""

from .errors import (AcceptanceError, BudgetExceededError, ChainNotFoundError,
                     ConfigError, DegenerateIntersectionError, FitUndefinedError,
                     InvalidMeasureError, InvalidWindowError, NoValidDeltaError,
                     SlfvError)
from .events import Event, EventLog, Window, next_candidate, replica_stream
from .measure import RadiusMeasure, SlowChainParams, slow_chain_params, unit_model
from .occupancy import (Disk, HalfPlane, OccupiedState, PointSet, SeedRegion,
                        SeedUnion, origin_seed, replay_log)
from .simulator import (AdaptiveWindow, EventCount, FixedWindow, HalfPlaneReached,
                        PointCovered, SegmentCovered, StopReport, TimeHorizon,
                        TwoTypeRule, default_strip_window, hitting_time,
                        run_forward, run_scripted, run_two_type, state_from_log,
                        window_convergence)
from .chains import (Chain, ChainLink, ChainStats, SlowChain, ancestral_skeleton,
                     chain_stats, extract_geodesic, sample_slow_chain,
                     skeleton_meets_seed, slow_chain_from_candidates)

__version__ = "0.1.0"
