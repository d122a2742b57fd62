"""Index-notation tensor algebra and calculus with numerical verification."""

from .dense_tensor import DenseTensor, einsum_eval, load_tensor, save_tensor, transform
from .errors import DomainError, ParseError, ShapeError, TensorkitError, ValidationError
from .index_lang import parse, render, validate
from .special_tensors import epsilon, generalized_kronecker, kronecker

__version__ = "0.1.0"
