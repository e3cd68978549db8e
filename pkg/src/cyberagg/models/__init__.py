from .logistic import SoftmaxRegression, lr_loss_and_grad
from .network import (
    AugmentedHeadClassifier,
    FeedForwardClassifier,
    flatten_params,
    nn_loss_and_grads,
    parameter_count,
    unflatten_params,
)
from .persistence import TrainedModel, load_model, save_model
from .svm import RBFKernelSVM, rbf_kernel

__all__ = [
    "AugmentedHeadClassifier",
    "FeedForwardClassifier",
    "RBFKernelSVM",
    "SoftmaxRegression",
    "TrainedModel",
    "flatten_params",
    "load_model",
    "lr_loss_and_grad",
    "nn_loss_and_grads",
    "parameter_count",
    "rbf_kernel",
    "save_model",
    "unflatten_params",
]
