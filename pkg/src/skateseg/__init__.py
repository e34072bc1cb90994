"""Jump-procedure-aware temporal action segmentation for skating poses.

The package splits into: core value types (rigs, pose sequences,
segments), the label taxonomy, dataset I/O, the preprocessing chain,
the annotation model, segmentation/pose metrics, a trainable linear
baseline segmenter, a synthetic corpus generator, and the annotation
service behind the CLI.
"""

from .core import (FrameLabels, H36M17, JointRig, PoseSequence, Segment,
                   load_rig, save_rig)
from .taxonomy import (Category, JumpType, Label, LabelTaxonomy, Level,
                       build_taxonomy, parse_label, project_to_set)
from .annotation import (CorpusStats, JumpInstance, SequenceAnnotation,
                         Violation, corpus_stats, expand_to_frames,
                         jump_instances, load_annotation, save_annotation,
                         segments_from_frames, to_coarse, validate)
from .metrics import (EvalReport, F1Score, MatchCounts, evaluate_corpus,
                      f1_at_k, frame_accuracy, iou, match_segments, mpjpe)
from .preprocess import (AlignmentResult, FeatureSequence, align_pose_sequence,
                         build_features, center_root, facing_angle,
                         mask_low_confidence, normalize_maxabs,
                         preprocess_sequence)
from .io import (CorpusManifest, ManifestEntry, RigMapping, SplitResult,
                 import_external_predictions, ingest_fsjump3d, load_manifest,
                 load_pose_sequence, load_rig_mapping, resample,
                 save_frame_labels, save_manifest, save_pose_sequence,
                 save_rig_mapping, split_by_competition)
from .baseline import (LinearSegmenterModel, Standardizer, TrainConfig,
                       load_model, predict_frames, save_model, smooth_labels,
                       train, window_features)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
