"""Quality-diversity optimization with online-learned behavioral descriptors.

The package combines an unstructured behavioral archive, descriptor
extractors (hand-coded, genotype, PCA, convolutional autoencoder, raw
sensory CVT), two simulated planar tasks, and an experiment harness with
coverage and diversity metrics.
"""

from .archive import (AddResult, AddStatus, CuriosityConfig, Individual,
                      UnstructuredArchive, rebuild_after_update, recompute_l,
                      update_curiosity)
from .autoencoder import ConvAutoencoder, NetworkSpec, TrainReport
from .config import (DrConfig, MetricsConfig, CvtSettings, RunConfig, SuiteConfig,
                     VARIANTS, load_run_config, load_suite_config)
from .cvt import (CentroidSet, CvtGrid, LloydKMeans, build_blind_centroids,
                  build_prior_centroids, nearest_centroids)
from .engine import RunState, initialize, mutate, refine_descriptors, run_batch
from .extractors import (DEFAULT_UPDATE_BATCHES, DescriptorExtractor,
                         GenotypeDescriptor, HandCodedDescriptor,
                         LearnedDescriptor, SensoryDescriptor, UpdateSchedule)
from .experiment import (MetricsRecorder, RunRecord, SuiteResult,
                         export_plot_data, ground_truth_points, nearest_rank,
                         run, run_many, run_suite)
from .metrics import (diversity, histogram_counts, klc, normalized_histogram,
                      reconstruction_rmse, repertoire_size, traversed_cells)
from .pca import PcaReducer
from .tasks import (AirHockeyTask, ArenaConfig, BallisticConfig, BallisticTask,
                    SENSORY_DIM, TRAJECTORY_STEPS, forward_kinematics,
                    sensory_vector, trajectory_from_sensory)

__version__ = "0.1.0"

__all__ = [
    "AddResult", "AddStatus", "AirHockeyTask", "ArenaConfig",
    "BallisticConfig", "BallisticTask", "CentroidSet", "ConvAutoencoder",
    "CuriosityConfig", "CvtGrid", "CvtSettings", "DEFAULT_UPDATE_BATCHES",
    "DescriptorExtractor", "DrConfig", "GenotypeDescriptor",
    "HandCodedDescriptor", "Individual", "LearnedDescriptor", "LloydKMeans",
    "MetricsConfig", "MetricsRecorder", "NetworkSpec", "PcaReducer",
    "RunConfig", "RunRecord", "RunState", "SENSORY_DIM", "SensoryDescriptor",
    "SuiteConfig", "SuiteResult", "TRAJECTORY_STEPS", "TrainReport",
    "UnstructuredArchive", "UpdateSchedule", "VARIANTS",
    "build_blind_centroids", "build_prior_centroids", "diversity",
    "export_plot_data", "forward_kinematics", "ground_truth_points",
    "histogram_counts", "initialize", "klc", "load_run_config",
    "load_suite_config", "mutate",
    "nearest_centroids", "nearest_rank", "normalized_histogram", "recompute_l",
    "reconstruction_rmse", "refine_descriptors", "repertoire_size",
    "rebuild_after_update", "run", "run_batch", "run_many", "run_suite",
    "sensory_vector",
    "trajectory_from_sensory", "traversed_cells", "update_curiosity",
]
