from .binning import BinnedDataset, Dataset, bin_value, build_bins
from .boosting import (
    BoostConfig,
    BoostModel,
    IterationRecord,
    line_search,
    load_model,
    predict,
    save_model,
    train,
)
from .dist_normal import (
    NormalParams,
    fisher,
    natural_gradient,
    natural_gradient_solve,
    nll_point,
    ordinary_gradient,
    point_prediction,
    relative_std,
)
from .tree import RegressionTree, TreeConfig, fit_tree, predict_tree, tree_importance

__version__ = "0.1.0"
