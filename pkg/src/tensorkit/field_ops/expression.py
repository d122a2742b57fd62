"""Evaluate index-notation expressions that contain the partial operator ``pd``.

``pd_i`` differentiates the product of every factor to its right, so
``pd_i A_i`` is a divergence and ``e_{ijk} pd_j A_k`` a curl.  Factors bind
to fields (callables of points) or to constant DenseTensors; ``e`` and ``d``
are the 3D permutation symbol and Kronecker delta unless rebound.
"""

from __future__ import annotations

from collections import Counter
from typing import Callable, Mapping

import numpy as np

from .. import index_lang as il
from ..dense_tensor import DenseTensor, contract_labelled
from ..errors import ShapeError, ValidationError
from ..special_tensors import epsilon, kronecker
from .differential import FIRST_DERIVATIVE, FDScheme, batch_shape, partial


def _factor_value(f: il.TensorFactor, bind: Mapping, points) -> np.ndarray:
    n = len(f.indices)
    if f.name in bind:
        value = bind[f.name]
    elif f.name == il.EPSILON_NAME:
        value = epsilon(3)
    elif f.name == il.DELTA_NAME:
        value = kronecker(3)
    else:
        raise ValidationError(f"unbound factor {f.name!r}")
    if isinstance(value, DenseTensor):
        arr = value.components
        expected = (3,) * n
    else:
        arr = np.asarray(value(points), dtype=float)
        expected = (3,) * n + batch_shape(points)
    if arr.shape != expected:
        raise ShapeError(f"{f.name!r} carries {n} indices but evaluates to shape {arr.shape}")
    return arr


def _product(factors, bind, points, scheme):
    """(labels, array) for a factor product; labels occurring twice are summed."""
    operands = []
    for k, f in enumerate(factors):
        if f.is_derivative:
            rest = factors[k + 1:]
            if not rest:
                raise ValidationError("'pd' has nothing to act on")
            labels = _product(rest, bind, points, scheme)[0]
            inner = lambda p: _product(rest, bind, p, scheme)[1]
            stacked = np.stack([partial(inner, q, points, scheme) for q in range(3)])
            operands.append(([f.indices[0].symbol] + labels, stacked))
            break
        operands.append(([o.symbol for o in f.indices], _factor_value(f, bind, points)))
    counts = Counter(s for labels, _ in operands for s in labels)
    keep = []
    for labels, _ in operands:
        for s in labels:
            if counts[s] == 1 and s not in keep:
                keep.append(s)
    return keep, contract_labelled(operands, keep, batch_shape(points))


def evaluate_field_expression(expr, bind: Mapping[str, Callable | DenseTensor], points,
                              scheme: FDScheme = FIRST_DERIVATIVE) -> np.ndarray:
    """Values of ``expr`` at ``points`` with shape ``(3,)*n_free + batch``.

    Output slots follow the first appearance of the free indices in the
    first non-zero term, as in :func:`tensorkit.dense_tensor.einsum_eval`.
    """
    if isinstance(expr, str):
        expr = il.parse(expr)
    if isinstance(expr, il.Equation):
        raise ValidationError("evaluate_field_expression takes an expression, not an equation")
    report = il.validate(expr, il.CARTESIAN)
    if not report.ok:
        raise ValidationError("expression is not legitimate: "
                              + "; ".join(d.message for d in report.diagnostics), report)
    pts = np.asarray(points, dtype=float)
    batch = batch_shape(pts)
    first = next((t for t in expr.terms if not t.is_zero_literal), None)
    out = [o.symbol for o in il.free_occurrences(first)] if first is not None else []
    result = np.zeros((3,) * len(out) + batch)
    for term in expr.terms:
        if term.is_zero_literal:
            continue
        if term.factors:
            labels, value = _product(term.factors, bind, pts, scheme)
            value = contract_labelled([(labels, value)], out, batch)
        else:
            value = np.ones(batch)
        result = result + float(term.coefficient) * value
    return result
