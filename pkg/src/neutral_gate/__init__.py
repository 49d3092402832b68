"""Expression-neutrality quality estimation toolkit."""

from .codec import (
    CodecError,
    ComboScheme,
    ComboVector,
    FeatureRecord,
    combine,
    load_records,
    read_manifest,
    read_matrix,
    write_manifest,
    write_matrix,
)
from .dataset import (
    BinaryLabel,
    DatasetError,
    LabeledSample,
    SplitSpec,
    balance,
    balance_per_dataset,
    binarize,
    split_identity_disjoint,
)
from .evaluation import (
    ClassFlow,
    DetCurve,
    EdcCurve,
    EvalError,
    MatedComparison,
    class_flow,
    det_curve,
    edc_curve,
    pauc,
)
from .learners import (
    BoostConfig,
    ForestConfig,
    ModelKind,
    SvmConfig,
    TrainedClassifier,
    load_model,
    save_model,
    train,
)
from .neutrality import NeutralityQuality, quality_from_confidence, score_samples

__version__ = "0.1.0"
