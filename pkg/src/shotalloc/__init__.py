"""Spatial allocative-efficiency metrics for basketball lineups."""
from .court import (GRID, CourtGrid, RegionPartition, broad3, empirical12, point_value,
                    point_values)
from .inference import PermTestResult, game_records, glpl, permutation_test, tglpl
from .metrics import (MetricSurfaces, fgp_rank_summaries, lineup_metrics, lpl_cell,
                      lpl_per_shot, plc_cell, rank_vector, reallocate)
from .score_model import fit_score_model, points_lost_summary
from .surfaces import (FgaSurface, FgPctPosterior, estimate_fga, estimate_fgp_empirical,
                       estimate_fgp_shrunk)
from .synth import oracle_lpl

__version__ = "0.1.0"
