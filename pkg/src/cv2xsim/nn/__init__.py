"""From-scratch convolutional denoiser: layers, model, Adam, training, checkpoints."""

from .layers import BatchNorm2D, Conv2D, Dense, ReLU, mse_loss
from .model import ArchConfig, Model, build_model, from_channels, predict, to_channels
from .optim import Adam, adam_step
from .training import TrainConfig, stratified_split, train
from .checkpoint import load_model, save_model

__all__ = [
    "Adam",
    "ArchConfig",
    "BatchNorm2D",
    "Conv2D",
    "Dense",
    "Model",
    "ReLU",
    "TrainConfig",
    "adam_step",
    "build_model",
    "from_channels",
    "load_model",
    "mse_loss",
    "predict",
    "save_model",
    "stratified_split",
    "to_channels",
    "train",
]
