"""Desk-scale rectified-flow model: straight-line interpolation between data
and noise, a small convolutional velocity field with count conditioning, and
a coarse-to-fine zero-shot count classifier."""

from .checkpoint import load_model, save_model
from .classifier import ClassifierConfig, ClassifyResult, classify_coarse_to_fine, count_loss, make_pairs
from .data import FlowDataset, image_to_unit, load_training_set, unit_to_image
from .net import NetConfig, VelocityNet, forward_interpolate, grad_check, velocity_target
from .sampling import SampleConfig, euler_sample, plan_sample_layout
from .train import TrainBatch, TrainConfig, sample_timesteps, train, train_step

__all__ = [
    "ClassifierConfig", "ClassifyResult", "FlowDataset", "NetConfig",
    "SampleConfig", "TrainBatch", "TrainConfig", "VelocityNet",
    "classify_coarse_to_fine", "count_loss", "euler_sample",
    "forward_interpolate", "grad_check", "image_to_unit", "load_model",
    "load_training_set", "make_pairs", "plan_sample_layout", "sample_timesteps",
    "save_model", "train", "train_step", "unit_to_image", "velocity_target",
]
