"""Export trained models as standalone source code.

Dialects:

``c99``
    One translation unit exposing ``int predict(const float features[N])``.
    Forests become one nested ``if/else`` function per tree plus a vote;
    MLPs become constant weight tables and a fixed-size forward pass.
``pseudo``
    Indented pseudo-code of the same logic, for documentation.
"""
from __future__ import annotations

import os
import shutil
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .features import FEATURE_NAMES
from .learn.forest import ForestModel, Tree
from .learn.mlp import MlpModel
from .learn.persist import model_digest

DIALECTS = ("c99", "pseudo")
ENTRY = "predict"


class ExportError(ValueError):
    pass


@dataclass(frozen=True)
class ExportBundle:
    source: str
    entry: str
    feature_names: tuple[str, ...]
    dialect: str
    digest: str

    @property
    def suffix(self) -> str:
        return ".c" if self.dialect == "c99" else ".txt"


def _check_dialect(dialect: str) -> None:
    if dialect not in DIALECTS:
        raise ExportError(f"unknown dialect {dialect!r}; available: {', '.join(DIALECTS)}")


def _lit(x: float) -> str:
    """Shortest decimal that round-trips to the same double."""
    s = repr(float(x))
    if s in ("inf", "-inf", "nan"):
        raise ExportError(f"cannot emit non-finite constant {s}")
    return s


def _digest(model) -> str:
    try:
        return model_digest(model)
    except ValueError:  # the JSON encoding refuses inf/nan
        raise ExportError("cannot emit non-finite constant in model") from None


def _feature_names(names, n: int) -> tuple[str, ...]:
    if names is None:
        names = FEATURE_NAMES if n == len(FEATURE_NAMES) else [f"x{i}" for i in range(n)]
    names = tuple(names)
    if len(names) != n:
        raise ExportError(f"{len(names)} feature names for a {n}-feature model")
    return names


def _header_comment(kind: str, names, digest: str) -> list[str]:
    lines = ["/*", f" * Generated {kind}. Do not edit.", f" * model sha256: {digest}",
             " * feature order:"]
    for i, n in enumerate(names):
        lines.append(f" *   [{i:2d}] {n}")
    lines.append(" */")
    return lines


def _c_tree_body(tree: Tree, out: list[str]) -> None:
    leaf = tree.leaf_class
    # explicit stack: deep trees must not hit the Python recursion limit
    stack: list[tuple] = [("node", 0, 1)]
    while stack:
        item = stack.pop()
        if item[0] == "text":
            out.append(item[1])
            continue
        _, node, depth = item
        pad = "    " * depth
        if tree.feature[node] < 0:
            out.append(f"{pad}return {int(leaf[node])};")
            continue
        out.append(f"{pad}if (f[{int(tree.feature[node])}] <= {_lit(tree.threshold[node])}) {{")
        stack.append(("text", f"{pad}}}"))
        stack.append(("node", int(tree.right[node]), depth + 1))
        stack.append(("text", f"{pad}}} else {{"))
        stack.append(("node", int(tree.left[node]), depth + 1))


def _pseudo_tree_body(tree: Tree, names, out: list[str]) -> None:
    leaf = tree.leaf_class
    stack: list[tuple] = [("node", 0, 1)]
    while stack:
        item = stack.pop()
        if item[0] == "text":
            out.append(item[1])
            continue
        _, node, depth = item
        pad = "  " * depth
        if tree.feature[node] < 0:
            out.append(f"{pad}return class {int(leaf[node])}")
            continue
        f = int(tree.feature[node])
        out.append(f"{pad}if x[{f}] ({names[f]}) <= {_lit(tree.threshold[node])}:")
        stack.append(("node", int(tree.right[node]), depth + 1))
        stack.append(("text", f"{pad}else:"))
        stack.append(("node", int(tree.left[node]), depth + 1))


def export_forest(forest: ForestModel, dialect: str = "c99",
                  feature_names: Sequence[str] | None = None) -> ExportBundle:
    _check_dialect(dialect)
    names = _feature_names(feature_names, forest.n_features)
    digest = _digest(forest)
    d, c = forest.n_features, forest.n_classes
    out: list[str] = []
    if dialect == "c99":
        out += _header_comment(f"random forest ({forest.n_trees} trees, {c} classes)", names, digest)
        out.append("")
        for t, tree in enumerate(forest.trees):
            out.append(f"static int tree_{t}(const float f[{d}])")
            out.append("{")
            _c_tree_body(tree, out)
            out.append("}")
            out.append("")
        out.append(f"int {ENTRY}(const float features[{d}])")
        out.append("{")
        out.append(f"    int votes[{c}] = {{0}};")
        out.append("    int best = 0;")
        out.append("    int k;")
        for t in range(forest.n_trees):
            out.append(f"    votes[tree_{t}(features)]++;")
        out.append(f"    for (k = 1; k < {c}; ++k) {{")
        out.append("        if (votes[k] > votes[best]) {")
        out.append("            best = k;")
        out.append("        }")
        out.append("    }")
        out.append("    return best;")
        out.append("}")
    else:
        out.append(f"# random forest: {forest.n_trees} trees, {d} features, {c} classes")
        out.append(f"# model sha256: {digest}")
        for t, tree in enumerate(forest.trees):
            out.append(f"tree {t}(x):")
            _pseudo_tree_body(tree, names, out)
        out.append(f"{ENTRY}(x):")
        out.append(f"  return class with most votes over tree 0..{forest.n_trees - 1}(x);"
                   " ties -> lowest class")
    return ExportBundle("\n".join(out) + "\n", ENTRY, names, dialect, digest)


def _c_array(values: np.ndarray, per_line: int = 4) -> str:
    flat = [_lit(v) for v in np.asarray(values, dtype=np.float64).ravel()]
    rows = [", ".join(flat[i:i + per_line]) for i in range(0, len(flat), per_line)]
    return "{\n    " + ",\n    ".join(rows) + "\n}" if rows else "{0}"


def export_mlp(mlp: MlpModel, dialect: str = "c99",
               feature_names: Sequence[str] | None = None) -> ExportBundle:
    """Forward pass up to the output logits; softmax is skipped (argmax-invariant)."""
    _check_dialect(dialect)
    d, h, c = mlp.layer_sizes
    names = _feature_names(feature_names, d)
    digest = _digest(mlp)
    p, sc = mlp.params, mlp.scaler
    out: list[str] = []
    if dialect == "c99":
        out += _header_comment(f"perceptron ({d}-{h}-{c}, logistic hidden layer)", names, digest)
        out += ["", "#include <math.h>", ""]
        out.append(f"static const double in_offset[{d}] = {_c_array(sc.offset)};")
        out.append(f"static const double in_scale[{d}] = {_c_array(sc.scale)};")
        out.append(f"static const double w1[{h * d}] = {_c_array(p.W1)};")
        out.append(f"static const double b1[{h}] = {_c_array(p.b1)};")
        out.append(f"static const double w2[{c * h}] = {_c_array(p.W2)};")
        out.append(f"static const double b2[{c}] = {_c_array(p.b2)};")
        out += [
            "",
            f"int {ENTRY}(const float features[{d}])",
            "{",
            f"    double x[{d}];",
            f"    double hid[{h}];",
            "    double z, best_z = 0.0;",
            "    int i, j, best = 0;",
            f"    for (i = 0; i < {d}; ++i) {{",
            "        x[i] = ((double)features[i] - in_offset[i]) * in_scale[i];",
            "    }",
            f"    for (j = 0; j < {h}; ++j) {{",
            "        double a = b1[j];",
            f"        for (i = 0; i < {d}; ++i) {{",
            f"            a += w1[j * {d} + i] * x[i];",
            "        }",
            "        hid[j] = 1.0 / (1.0 + exp(-a));",
            "    }",
            f"    for (i = 0; i < {c}; ++i) {{",
            "        z = b2[i];",
            f"        for (j = 0; j < {h}; ++j) {{",
            f"            z += w2[i * {h} + j] * hid[j];",
            "        }",
            "        if (i == 0 || z > best_z) {",
            "            best_z = z;",
            "            best = i;",
            "        }",
            "    }",
            "    return best;",
            "}",
        ]
    else:
        out += [
            f"# perceptron {d}-{h}-{c}; model sha256: {digest}",
            f"{ENTRY}(x):",
            "  x = (x - in_offset) * in_scale",
            "  hidden = logistic(W1 @ x + b1)",
            "  return argmax(W2 @ hidden + b2)   # ties -> lowest class",
        ]
    return ExportBundle("\n".join(out) + "\n", ENTRY, names, dialect, digest)


def export_model(model, dialect: str = "c99", feature_names=None) -> ExportBundle:
    if isinstance(model, ForestModel):
        return export_forest(model, dialect, feature_names)
    if isinstance(model, MlpModel):
        return export_mlp(model, dialect, feature_names)
    raise ExportError(f"no exporter for {type(model).__name__}")


_HARNESS_MAIN = """
#include <stdio.h>

int main(int argc, char **argv)
{{
    float row[{d}];
    FILE *in;
    if (argc < 2 || (in = fopen(argv[1], "rb")) == NULL) {{
        return 2;
    }}
    while (fread(row, sizeof(float), {d}, in) == {d}) {{
        printf("%d\\n", {entry}(row));
    }}
    fclose(in);
    return 0;
}}
"""


def find_compiler() -> str | None:
    for cc in (os.environ.get("CC"), "cc", "gcc", "clang"):
        if cc and shutil.which(cc):
            return cc
    return None


def run_c99(bundle: ExportBundle, X, cc: str | None = None) -> np.ndarray:
    """Compile ``bundle`` with a small driver and return its class per row.

    Rows are passed as 32-bit floats, the entry point's input type.
    """
    if bundle.dialect != "c99":
        raise ExportError("only c99 bundles can be compiled")
    cc = cc or find_compiler()
    if cc is None:
        raise ExportError("no C compiler found (set CC)")
    X32 = np.ascontiguousarray(X, dtype=np.float32)
    d = len(bundle.feature_names)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        src = tmp / "model.c"
        src.write_text(bundle.source + _HARNESS_MAIN.format(d=d, entry=bundle.entry))
        exe = tmp / "model"
        proc = subprocess.run([cc, "-std=c99", "-O1", "-o", str(exe), str(src), "-lm"],
                              capture_output=True, text=True)
        if proc.returncode != 0:
            raise ExportError(f"compilation failed:\n{proc.stderr}")
        data = tmp / "rows.bin"
        X32.tofile(data)
        run = subprocess.run([str(exe), str(data)], capture_output=True, text=True, check=True)
    return np.array([int(v) for v in run.stdout.split()], dtype=np.int64)
