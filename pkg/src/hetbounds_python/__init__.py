__version__ = "0.1.0"

from . import errors
from . import config
from . import observation_table
from . import load_csv
from . import make_folds
from . import crossfit
from . import classify_cells
from . import scores
from . import orthogonality_check
from . import build_basis
from . import loocv_select
from . import project
from . import critical_value
from . import confidence_interval
from . import run_bootstrap
from . import confidence_band
from . import simulate
from . import true_theta
from . import true_nuisance
from . import oracle_bounds
from . import coverage_study
from . import power_study
from . import pipeline
from . import write_outputs
from . import cli
