"""Neural substrate: autodiff tensors, GRU/dense ops, Adam, persistence."""

from .autograd import (Tensor, as_tensor, backward, no_grad, add, sub, mul, scale,
                       matvec, dot, sigmoid, tanh, relu, softmax, concat,
                       sum_vectors, mean_vectors, stack_scalars, vsum, take_row)
from .core import (GruParams, TrainConfig, AdamState, gru_step, gru_forward,
                   bigru_forward, dense, softmax_cross_entropy, binary_cross_entropy,
                   adam_update, epoch_lr, gradient_check, glorot, zeros, init_gru,
                   zero_grads, ACTIVATIONS)
from .serialize import save_model, load_model, MODEL_KINDS, FORMAT_VERSION
