"""Domain-adaptive fault diagnosis on 1-D vibration signals.

Trains a small 1-D convolutional classifier on a labeled source domain and
adapts it to an unlabeled target domain by penalizing the mismatch of feature
distributions (marginal plus per-class conditional, with iteratively refined
pseudo labels).
"""

from .adaptation import (FeatureBatch, PenaltyResult, assign_pseudo_labels,
                         conditional_mmd2, jda_penalty, marginal_mmd2)
from .data import Dataset, export_csv, import_csv, normalize_windows, prepare
from .datagen import (ClassSignature, DomainSpec, TransferTask,
                      generate_domain, make_transfer_task, stock_task,
                      STOCK_TASKS)
from .errors import (ConfigurationError, FaultAdaptError, InputError,
                     ParseError, TrainingAborted)
from .network import (Network, build_network, load_network, save_network,
                      softmax_cross_entropy)
from .report import (ComparisonReport, ConfusionMatrix, evaluate,
                     export_features, export_history, run_comparison,
                     write_summary)
from .training import AdaptHistory, TrainConfig, adapt, make_batches, pretrain

__version__ = "0.1.0"
