"""Block assembly of sparse NLPs from vectorised pointwise functions.

A transcription declares variables, reserves constraint rows and attaches
contributions to them:

* linear terms ``sum(coeff * z[col])`` and constant offsets,
* pointwise blocks: a function of k arguments evaluated on P points at once,
  where every argument is a per-point variable index (or a constant where the
  index is -1). Jacobian entries come from dual numbers seeded per argument,
  so each block costs a single vectorised evaluation with k seeds.

Second derivatives of the Lagrangian are central differences of those exact
first derivatives, one argument at a time: 2k more evaluations per block,
still vectorised over the points.

The sparsity pattern is fixed at build time.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from src.exceptions import TranscriptionError
from src.helpers.nlp.problem import HESSIAN_STEP, NlpEvaluation, NlpLayout, NlpProblem
from src.utils import dual as dn

EQ = 'eq'
INEQ = 'ineq'


@dataclass
class Arg:
    """Per-point operand: variable indices, with constants where index == -1"""
    index: np.ndarray
    value: np.ndarray

    @property
    def size(self) -> int:
        return self.index.size


@dataclass
class _Pointwise:
    fn: Callable
    args: List[Arg]
    rows: List[np.ndarray]
    kind: str


@dataclass
class _Section:
    count: int = 0
    labels: List[str] = field(default_factory=list)
    lin_rows: List[np.ndarray] = field(default_factory=list)
    lin_cols: List[np.ndarray] = field(default_factory=list)
    lin_vals: List[np.ndarray] = field(default_factory=list)
    offsets: List[Tuple[np.ndarray, np.ndarray]] = field(default_factory=list)


class NlpBuilder:
    def __init__(self):
        self._lower: List[np.ndarray] = []
        self._upper: List[np.ndarray] = []
        self._labels: List[str] = []
        self._n = 0
        self._index: Dict[str, np.ndarray] = {}
        self._sections = {EQ: _Section(), INEQ: _Section()}
        self._blocks: List[_Pointwise] = []
        self._objective_blocks: List[Tuple[Callable, List[Arg]]] = []
        self._objective_linear: Dict[int, float] = {}
        self._objective_constant = 0.0
        self.objective_scale = 1.0

    @property
    def n(self) -> int:
        return self._n

    # variables

    def add_variables(self, name: str, shape, lower, upper) -> np.ndarray:
        if name in self._index:
            raise TranscriptionError(f'Variable group {name!r} declared twice')
        shape = (shape,) if np.isscalar(shape) else tuple(shape)
        size = int(np.prod(shape)) if shape else 1
        lo = np.broadcast_to(np.asarray(lower, dtype=float), shape).ravel()
        hi = np.broadcast_to(np.asarray(upper, dtype=float), shape).ravel()
        if np.any(lo > hi):
            raise TranscriptionError(f'Variable group {name!r} has lower bounds above upper bounds')
        idx = np.arange(self._n, self._n + size).reshape(shape)
        self._lower.append(lo)
        self._upper.append(hi)
        self._labels.extend(f'{name}[{i}]' for i in range(size))
        self._n += size
        self._index[name] = idx
        return idx

    def var(self, index, size: Optional[int] = None) -> Arg:
        index = np.asarray(index, dtype=int)
        if size is not None:
            index = np.broadcast_to(index, (size,))
        index = np.array(index).ravel()
        return Arg(index, np.zeros(index.size))

    def const(self, value, size: int) -> Arg:
        value = np.broadcast_to(np.asarray(value, dtype=float), (size,)).copy()
        return Arg(np.full(size, -1, dtype=int), value)

    # constraints

    def add_rows(self, kind: str, count: int, label: str) -> np.ndarray:
        section = self._sections[kind]
        rows = np.arange(section.count, section.count + count)
        section.count += count
        section.labels.extend(f'{label}[{i}]' for i in range(count))
        return rows

    def add_linear(self, kind: str, rows, cols, coeffs) -> None:
        rows, cols, coeffs = np.broadcast_arrays(np.asarray(rows), np.asarray(cols), np.asarray(coeffs, dtype=float))
        keep = cols.ravel() >= 0
        section = self._sections[kind]
        section.lin_rows.append(rows.ravel()[keep].astype(int))
        section.lin_cols.append(cols.ravel()[keep].astype(int))
        section.lin_vals.append(coeffs.ravel()[keep])

    def add_offset(self, kind: str, rows, values) -> None:
        rows, values = np.broadcast_arrays(np.asarray(rows), np.asarray(values, dtype=float))
        self._sections[kind].offsets.append((rows.ravel().astype(int), values.ravel().copy()))

    def add_arg_linear(self, kind: str, rows, arg: Arg, coeff: float) -> None:
        """coeff * arg, whether the arg is a variable or a constant"""
        rows = np.asarray(rows).ravel()
        is_var = arg.index >= 0
        self.add_linear(kind, rows[is_var], arg.index[is_var], coeff)
        self.add_offset(kind, rows[~is_var], coeff * arg.value[~is_var])

    def add_pointwise(self, kind: str, rows: Sequence[np.ndarray], fn: Callable, args: Sequence[Arg]) -> None:
        sizes = {a.size for a in args} | {np.asarray(r).size for r in rows}
        if len(sizes) != 1:
            raise TranscriptionError(f'Pointwise block operands disagree in size: {sorted(sizes)}')
        self._blocks.append(_Pointwise(fn, list(args), [np.asarray(r).ravel() for r in rows], kind))

    # objective

    def add_objective_linear(self, cols, coeffs) -> None:
        cols, coeffs = np.broadcast_arrays(np.asarray(cols), np.asarray(coeffs, dtype=float))
        for c, v in zip(cols.ravel(), coeffs.ravel()):
            if c >= 0:
                self._objective_linear[int(c)] = self._objective_linear.get(int(c), 0.0) + float(v)

    def add_objective_constant(self, value: float) -> None:
        self._objective_constant += float(value)

    def add_objective_pointwise(self, fn: Callable, args: Sequence[Arg]) -> None:
        self._objective_blocks.append((fn, list(args)))

    # assembly

    def build(self) -> Tuple[NlpProblem, NlpLayout]:
        n = self._n
        lower = np.concatenate(self._lower) if self._lower else np.zeros(0)
        upper = np.concatenate(self._upper) if self._upper else np.zeros(0)
        patterns = {}
        linear = {}
        offsets = {}
        for kind, section in self._sections.items():
            rows = [np.concatenate(section.lin_rows)] if section.lin_rows else []
            cols = [np.concatenate(section.lin_cols)] if section.lin_cols else []
            lin_vals = np.concatenate(section.lin_vals) if section.lin_vals else np.zeros(0)
            linear[kind] = (rows[0] if rows else np.zeros(0, int), cols[0] if cols else np.zeros(0, int), lin_vals)
            off = np.zeros(section.count)
            for r, v in section.offsets:
                np.add.at(off, r, v)
            offsets[kind] = off
            for block in self._blocks:
                if block.kind != kind:
                    continue
                for out_rows in block.rows:
                    for arg in block.args:
                        mask = arg.index >= 0
                        rows.append(out_rows[mask])
                        cols.append(arg.index[mask])
            if rows:
                patterns[kind] = (np.concatenate(rows).astype(int), np.concatenate(cols).astype(int))
            else:
                patterns[kind] = (np.zeros(0, int), np.zeros(0, int))

        blocks = list(self._blocks)
        objective_blocks = list(self._objective_blocks)
        obj_cols = np.array(sorted(self._objective_linear), dtype=int)
        obj_vals = np.array([self._objective_linear[c] for c in obj_cols], dtype=float)
        counts = {kind: s.count for kind, s in self._sections.items()}
        scale = self.objective_scale
        constant = self._objective_constant

        def arg_values(args, z):
            return [np.where(a.index >= 0, z[np.where(a.index >= 0, a.index, 0)], a.value) for a in args]

        def run_values(fn, args, values):
            k = len(args)
            seeded = []
            for j, (arg, value) in enumerate(zip(args, values)):
                partials = np.zeros((arg.size, k))
                partials[arg.index >= 0, j] = 1.0
                seeded.append(dn.Dual(value, partials))
            return fn(*seeded)

        def run_block(fn, args, z):
            return run_values(fn, args, arg_values(args, z))

        def evaluate(z: np.ndarray) -> NlpEvaluation:
            values = {kind: offsets[kind].copy() for kind in counts}
            data = {kind: [] for kind in counts}
            for kind in counts:
                r, c, v = linear[kind]
                np.add.at(values[kind], r, v * z[c])
                data[kind].append(v)
            for block in blocks:
                outputs = run_block(block.fn, block.args, z)
                if len(outputs) != len(block.rows):
                    raise TranscriptionError(
                        f'Pointwise block returned {len(outputs)} outputs, expected {len(block.rows)}')
                size = block.rows[0].size
                for out, out_rows in zip(outputs, block.rows):
                    val = np.broadcast_to(dn.value_of(out), (size,))
                    np.add.at(values[block.kind], out_rows, val)
                    partials = np.broadcast_to(dn.partials_of(out, len(block.args)), (size, len(block.args)))
                    for j, arg in enumerate(block.args):
                        data[block.kind].append(partials[arg.index >= 0, j])
            jacobians = {}
            for kind in counts:
                rows, cols = patterns[kind]
                vals = np.concatenate(data[kind]) if data[kind] else np.zeros(0)
                jacobians[kind] = sp.coo_matrix((vals, (rows, cols)), shape=(counts[kind], n)).tocsr()

            f = constant + (float(np.dot(obj_vals, z[obj_cols])) if obj_cols.size else 0.0)
            grad = np.zeros(n)
            np.add.at(grad, obj_cols, obj_vals)
            for fn, args in objective_blocks:
                out = run_block(fn, args, z)
                f += float(np.sum(dn.value_of(out)))
                partials = dn.partials_of(out, len(args))
                partials = np.broadcast_to(partials, (args[0].size, len(args)))
                for j, arg in enumerate(args):
                    mask = arg.index >= 0
                    np.add.at(grad, arg.index[mask], partials[mask, j])
            return NlpEvaluation(f * scale, grad * scale, values[EQ], jacobians[EQ],
                                 values[INEQ], jacobians[INEQ])

        def weighted_partials(fn, args, values, weights):
            outputs = run_values(fn, args, values)
            if not isinstance(outputs, (list, tuple)):
                outputs = [outputs]
            size, k = args[0].size, len(args)
            total = np.zeros((size, k))
            for out, w in zip(outputs, weights):
                total += np.asarray(w)[..., None] * np.broadcast_to(dn.partials_of(out, k), (size, k))
            return total

        def block_hessian(fn, args, z, weights, entries):
            """Appends (rows, cols, values) of the Hessian of sum(weights * outputs)"""
            values = arg_values(args, z)
            masks = [a.index >= 0 for a in args]
            for j, arg in enumerate(args):
                if not np.any(masks[j]):
                    continue
                h = HESSIAN_STEP * (1.0 + np.abs(values[j]))
                plus, minus = list(values), list(values)
                plus[j] = np.where(masks[j], values[j] + h, values[j])
                minus[j] = np.where(masks[j], values[j] - h, values[j])
                column = (weighted_partials(fn, args, plus, weights)
                          - weighted_partials(fn, args, minus, weights)) / (2.0 * h)[:, None]
                for i, other in enumerate(args):
                    both = masks[i] & masks[j]
                    entries.append((other.index[both], arg.index[both], column[both, i]))

        def hessian(z: np.ndarray, obj_factor: float, y_eq: np.ndarray, y_in: np.ndarray) -> sp.csr_matrix:
            multipliers = {EQ: y_eq, INEQ: y_in}
            entries = []
            for block in blocks:
                y = multipliers[block.kind]
                weights = [y[out_rows] for out_rows in block.rows]
                if any(np.any(w != 0.0) for w in weights):
                    block_hessian(block.fn, block.args, z, weights, entries)
            if obj_factor != 0.0:
                for fn, args in objective_blocks:
                    block_hessian(fn, args, z, [np.full(args[0].size, obj_factor * scale)], entries)
            if not entries:
                return sp.csr_matrix((n, n))
            rows, cols, vals = (np.concatenate(part) for part in zip(*entries))
            hess = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
            return 0.5 * (hess + hess.T)

        problem = NlpProblem(lower, upper, counts[EQ], counts[INEQ], evaluate,
                             patterns[EQ], patterns[INEQ],
                             eq_labels=self._sections[EQ].labels,
                             ineq_labels=self._sections[INEQ].labels,
                             variable_labels=self._labels, hessian=hessian)
        return problem, NlpLayout(dict(self._index))
