"""Multigraph limits, preferential growth and edge-reconnection dynamics."""

from .estimate import Estimate
from .multigraph import (Multigraph, Pattern, K2, loop_pattern, hom_density, inj_density, ind_density,
                         ms_distance_graphs, parse_graph, format_graph, read_graph)
from .multigraphon import (Multigraphon, StepMultigraphon, FunctionMultigraphon, SimpleGraphonMultigraphon,
                           TruncatedMultigraphon, ms_distance_graphons)
from .generators import GrowthParams, grow, sample_cm, cm_prob, growth_graph_prob, growth_degree_prob
from .dynamics import ReconnectParams, run_and_observe
from .limit import LimitParams, PoissonGammaKernel, sample_y

__version__ = "0.1.0"
