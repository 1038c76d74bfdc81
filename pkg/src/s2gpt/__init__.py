"""Sparse reduced-order physics-informed networks for parametric PDEs.

Offline: greedily select parameters, train a full network at each, compress
the snapshot family to an interpolation basis with 2n−1 "magic"/residual
collocation points. Online: solve any new parameter by training only the n
combination coefficients on that sparse point set.
"""

from .backend import backend_name
from .config import RunConfig, default_config, load_config
from .diffnet import Jet, MlpParams, forward_jet, init_params, pinn_loss_grad
from .full_pinn import Snapshot, snapshot_tables, train_full_pinn
from .greedy import GreedyTrace, offline_run, select_next
from .meta_model import (MetaArtifact, MetaSolution, SparseTables, gpt_loss_grad,
                         initial_guess, precompute_sparse_tables, reconstruct,
                         s2gpt_loss_grad, train_online)
from .metrics import compute_error_metrics
from .optim import OptimConfig, OptimResult, adam_run, gd_run, lbfgs_run
from .pdes import (CollocationGrid, GridResolution, PdeSpec, SlotVector,
                   build_grid, get_pde, helmholtz_source, residual_eval,
                   residual_partials, sample_parameter_grid,
                   sample_test_parameters)
from .reduction import (ReducedBasis, eim_step, geim_step, residual_field,
                        sparse_set)
from .store import load_artifact, save_artifact

__version__ = "0.1.0"
