"""Unsupervised image segmentation: SLIC superpixels, one-vs-all RBF SVMs
with Platt calibration, and superpixel-level MRF regularization."""

from ._core import (  # noqa: F401
    DegenerateLabels,
    DimensionMismatch,
    EmptyMask,
    EmptyRegion,
    Error,
    FormatError,
    InvalidParams,
    IoError,
    LabelOverflowError,
    LengthMismatch,
    PipelineConfig,
    SingleClass,
    adjacency,
    classify,
    color_moments,
    describe,
    energy,
    evaluate,
    f_measure,
    kl,
    lab_to_rgb,
    load_image,
    load_label_map,
    load_mask,
    platt_fit,
    regularize,
    rgb_to_lab,
    save_image,
    save_label_map,
    segment,
    slic,
    standardize,
    texture_codes,
    train_binary_svm,
)

__version__ = "0.1.0"
