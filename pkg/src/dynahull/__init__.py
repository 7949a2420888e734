"""Density-based dynamic point removal for accumulated indoor maps.

Accumulated scans stack static surfaces into dense shells while moving
objects smear into sparse ghosts; each point's k-nearest-neighbor convex
hull volume separates the two. This package provides the filtering
pipeline, exact spatial search and hull primitives it builds on, an
evaluation suite, and a synthetic labeled-scene generator.
"""

__version__ = "0.1.0"

from .cloud import (MotionLabel, PointCloud, downsample_uniform, load_cloud,
                    save_cloud)
from .cluster import ClusterAssignment, kmeans
from .errors import (CloudIoError, EmptyCloud, InsufficientPoints,
                     InvalidConfig, IoFailure, MalformedHeader,
                     NoGroundFound, NonFiniteCoordinate, TooFewPoints)
from .ground import GroundParams, GroundSplit, reattach_ground, segment_ground
from .hull import HullMesh, HullOutcome, convex_hull_3d, hull_volume
from .kdtree import KdTree3, KnnResult, build_index, knn, knn_many
from .metrics import (ConfusionReport, DistanceStats, MetricsReport, chamfer,
                      confusion, emd, evaluate, nn_distance_stats,
                      report_to_dict, report_to_json)
from .pipeline import (DensityField, DynaHullParams, FilterResult,
                       RemovalPlan, density_field, filter_map,
                       rescale_removal, threshold_removal)
from .scene import (LabeledScene, ScenarioConfig, generate_scene,
                    ground_truth_cloud)
