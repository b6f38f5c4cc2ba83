"""Product-unit network model.

A network maps k strictly positive inputs through m hidden product units
(each computes a product of inputs raised to real exponents) to L-1 linear
outputs; the L-th class is the reference with its output fixed at zero.
Class probabilities come from a softmax over the L outputs.

Representation: dense (m, k) exponent and (L-1, m) coefficient matrices with
boolean masks marking which connections exist. Entries whose mask is False
are kept at exactly 0.0 so the forward pass needs no masking.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

WEIGHT_INTERVAL = (-5.0, 5.0)

MODEL_FORMAT = "punn-model"
MODEL_VERSION = 1


@dataclass
class PunnNetwork:
    input_count: int
    class_count: int
    exponents: np.ndarray         # (m, k) float64, input -> hidden weights
    exponent_mask: np.ndarray     # (m, k) bool
    coefficients: np.ndarray      # (L-1, m) float64, hidden -> output weights
    coefficient_mask: np.ndarray  # (L-1, m) bool
    biases: np.ndarray            # (L-1,) float64

    @property
    def hidden_count(self) -> int:
        return self.exponents.shape[0]

    @property
    def output_count(self) -> int:
        return self.class_count - 1

    def clone(self) -> "PunnNetwork":
        return PunnNetwork(
            self.input_count,
            self.class_count,
            self.exponents.copy(),
            self.exponent_mask.copy(),
            self.coefficients.copy(),
            self.coefficient_mask.copy(),
            self.biases.copy(),
        )

    def input_links(self, node: int) -> dict[int, float]:
        """Existing input connections of one hidden node as {input index: exponent}."""
        row = self.exponent_mask[node]
        return {int(i): float(self.exponents[node, i]) for i in np.flatnonzero(row)}

    def output_links(self, output: int) -> dict[int, float]:
        """Existing hidden connections of one output as {hidden index: coefficient}."""
        row = self.coefficient_mask[output]
        return {int(j): float(self.coefficients[output, j]) for j in np.flatnonzero(row)}

    def validate(self, weight_interval: tuple[float, float] | None = None) -> None:
        """Raise ValueError if the structural invariants are broken."""
        m, k = self.exponents.shape
        if k != self.input_count or m < 1:
            raise ValueError("exponent matrix shape disagrees with input/hidden counts")
        if self.exponent_mask.shape != (m, k):
            raise ValueError("exponent mask shape mismatch")
        if self.coefficients.shape != (self.output_count, m):
            raise ValueError("coefficient matrix shape mismatch")
        if self.coefficient_mask.shape != (self.output_count, m):
            raise ValueError("coefficient mask shape mismatch")
        if self.biases.shape != (self.output_count,):
            raise ValueError("bias vector shape mismatch")
        if np.any(self.exponents[~self.exponent_mask] != 0.0):
            raise ValueError("absent input connection carries a nonzero exponent")
        if np.any(self.coefficients[~self.coefficient_mask] != 0.0):
            raise ValueError("absent output connection carries a nonzero coefficient")
        if weight_interval is not None:
            lo, hi = weight_interval
            for arr in (self.exponents, self.coefficients, self.biases):
                if np.any(arr < lo) or np.any(arr > hi):
                    raise ValueError("weight outside the configured interval")


def evaluate_outputs(net: PunnNetwork, pattern) -> np.ndarray:
    """Raw outputs of the L-1 trainable output nodes for one pattern.

    A hidden node with no input connections contributes the empty product 1;
    a hidden node not connected to an output contributes 0 there. The
    reference class output is identically 0 and is not returned.
    """
    x = np.asarray(pattern, dtype=float)
    if x.shape != (net.input_count,):
        raise ValueError(
            f"pattern has {x.size} components, network expects {net.input_count}"
        )
    if not np.all(np.isfinite(x)) or np.any(x <= 0.0):
        raise ValueError("pattern components must be finite and strictly positive")
    hidden = np.exp(net.exponents @ np.log(x))
    return net.coefficients @ hidden + net.biases


def batch_outputs(net: PunnNetwork, log_patterns: np.ndarray) -> np.ndarray:
    """Outputs for all patterns at once; takes pre-logged patterns (N, k)."""
    hidden = np.exp(log_patterns @ net.exponents.T)
    outputs = hidden @ net.coefficients.T
    outputs += net.biases
    return outputs


def class_probabilities(outputs) -> np.ndarray:
    """Softmax class distribution from the L-1 raw outputs.

    The implicit zero output of the reference class is appended before the
    softmax. Shift-stable: the maximum is subtracted first, which leaves the
    distribution unchanged.
    """
    f = np.asarray(outputs, dtype=float)
    if f.ndim != 1:
        raise ValueError("outputs must be a flat vector")
    if not np.all(np.isfinite(f)):
        raise ValueError("outputs contain non-finite values")
    full = np.append(f, 0.0)
    e = np.exp(full - full.max())
    return e / e.sum()


def predict_class(net: PunnNetwork, pattern) -> int:
    """Most probable class index; ties resolve to the lowest index."""
    return int(np.argmax(class_probabilities(evaluate_outputs(net, pattern))))


def predict_classes(net: PunnNetwork, dataset) -> np.ndarray:
    """Predicted class index per pattern of a processed dataset."""
    _check_compatible(net, dataset)
    with np.errstate(over="ignore", invalid="ignore"):
        outputs = batch_outputs(net, dataset.log_patterns)
    full = np.concatenate([outputs, np.zeros((outputs.shape[0], 1))], axis=1)
    return np.argmax(full, axis=1)


def _check_compatible(net: PunnNetwork, dataset) -> None:
    if dataset.pattern_count == 0:
        raise ValueError("dataset is empty")
    if dataset.input_count != net.input_count:
        raise ValueError(
            f"dataset has {dataset.input_count} inputs, network expects {net.input_count}"
        )
    if dataset.class_count != net.class_count:
        raise ValueError(
            f"dataset has {dataset.class_count} classes, network expects {net.class_count}"
        )


def cross_entropy_error(net: PunnNetwork, dataset) -> float:
    """Mean cross-entropy of the softmax distribution over the dataset.

    Computed in the numerically stable log-sum-exp form
    mean_i(logsumexp(f(x_i)) - f_{y_i}(x_i)) with the reference output at 0,
    which is algebraically identical to -mean_i(log g_{y_i}(x_i)).
    """
    _check_compatible(net, dataset)
    with np.errstate(over="ignore", invalid="ignore"):
        f = batch_outputs(net, dataset.log_patterns)
        lse = np.logaddexp.reduce(f, axis=1)
        np.logaddexp(lse, 0.0, out=lse)  # fold in the reference class's zero output
        rows, cols = dataset.trainable_gather
        lse[rows] -= f[rows, cols]
        return float(lse.mean())


def fitness(net: PunnNetwork, dataset) -> float:
    """Fitness 1 / (1 + error), in (0, 1] and strictly decreasing in the error.

    Networks whose outputs overflow to non-finite values get fitness 0.0,
    the limit of the formula for unbounded error.
    """
    err = cross_entropy_error(net, dataset)
    if not np.isfinite(err):
        return 0.0
    return 1.0 / (1.0 + max(err, 0.0))


def correct_classification_rate(net: PunnNetwork, dataset) -> float:
    """Percentage of dataset patterns whose predicted class is the true class."""
    predicted = predict_classes(net, dataset)
    return 100.0 * float(np.mean(predicted == dataset.labels))


def count_connections(net: PunnNetwork) -> int:
    """Existing input->hidden plus hidden->output connections plus the L-1 biases."""
    return int(net.exponent_mask.sum()) + int(net.coefficient_mask.sum()) + net.output_count


def random_node_links(
    rng: np.random.Generator,
    input_count: int,
    weight_interval: tuple[float, float],
    link_density: float,
) -> tuple[np.ndarray, np.ndarray]:
    """One hidden node's (exponent row, mask row).

    Each input connection exists independently with probability link_density;
    an all-absent draw is redone so every new node has at least one input.
    """
    lo, hi = weight_interval
    mask = rng.random(input_count) < link_density
    while not mask.any():
        mask = rng.random(input_count) < link_density
    exponents = np.zeros(input_count)
    exponents[mask] = rng.uniform(lo, hi, int(mask.sum()))
    return exponents, mask


def random_network(
    rng: np.random.Generator,
    input_count: int,
    max_hidden: int,
    class_count: int,
    weight_interval: tuple[float, float] = WEIGHT_INTERVAL,
    link_density: float = 0.5,
) -> PunnNetwork:
    """Random network: hidden node count uniform in [1, max_hidden], sparse
    random input connections per node, every node connected to every output,
    all weights uniform in the weight interval."""
    if input_count < 1:
        raise ValueError("input_count must be at least 1")
    if max_hidden < 1:
        raise ValueError("max_hidden must be at least 1")
    if class_count < 2:
        raise ValueError("class_count must be at least 2")
    if not 0.0 < link_density <= 1.0:
        raise ValueError("link_density must be in (0, 1]")
    lo, hi = weight_interval
    if lo > hi:
        raise ValueError("weight interval is empty")

    m = int(rng.integers(1, max_hidden + 1))
    exponent_mask = rng.random((m, input_count)) < link_density
    empty = np.flatnonzero(~exponent_mask.any(axis=1))
    while empty.size:  # same per-node redraw rule as random_node_links
        exponent_mask[empty] = rng.random((empty.size, input_count)) < link_density
        empty = np.flatnonzero(~exponent_mask.any(axis=1))
    exponents = np.zeros((m, input_count))
    exponents[exponent_mask] = rng.uniform(lo, hi, int(exponent_mask.sum()))
    outputs = class_count - 1
    coefficients = rng.uniform(lo, hi, (outputs, m))
    coefficient_mask = np.ones((outputs, m), dtype=bool)
    biases = rng.uniform(lo, hi, outputs)
    return PunnNetwork(
        input_count, class_count, exponents, exponent_mask,
        coefficients, coefficient_mask, biases,
    )


def network_document(
    net: PunnNetwork,
    max_hidden: int | None = None,
    class_names: list[str] | None = None,
    feature_names: list[str] | None = None,
) -> dict:
    """Versioned, JSON-ready description of a network.

    Floats survive a round trip bit-exactly (repr emits the shortest decimal
    that parses back to the same double, never more than 17 significant digits).
    """
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "input_count": net.input_count,
        "class_count": net.class_count,
        "max_hidden": max_hidden if max_hidden is not None else net.hidden_count,
        "hidden_nodes": [
            sorted((i, w) for i, w in net.input_links(j).items())
            for j in range(net.hidden_count)
        ],
        "outputs": [
            {
                "bias": float(net.biases[l]),
                "links": sorted((j, c) for j, c in net.output_links(l).items()),
            }
            for l in range(net.output_count)
        ],
    }
    if class_names is not None:
        doc["class_names"] = list(class_names)
    if feature_names is not None:
        doc["feature_names"] = list(feature_names)
    return doc


def serialize_network(net: PunnNetwork, **metadata) -> str:
    return json.dumps(network_document(net, **metadata), indent=2)


def network_from_document(doc: dict) -> PunnNetwork:
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError("not a recognized model document")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    k = int(doc["input_count"])
    class_count = int(doc["class_count"])
    nodes = doc["hidden_nodes"]
    m = len(nodes)
    outputs = class_count - 1
    exponents = np.zeros((m, k))
    exponent_mask = np.zeros((m, k), dtype=bool)
    for j, links in enumerate(nodes):
        for i, w in links:
            if not 0 <= i < k:
                raise ValueError(f"input index {i} out of range")
            exponents[j, i] = w
            exponent_mask[j, i] = True
    coefficients = np.zeros((outputs, m))
    coefficient_mask = np.zeros((outputs, m), dtype=bool)
    biases = np.zeros(outputs)
    if len(doc["outputs"]) != outputs:
        raise ValueError("output node count disagrees with class count")
    for l, out in enumerate(doc["outputs"]):
        biases[l] = out["bias"]
        for j, c in out["links"]:
            if not 0 <= j < m:
                raise ValueError(f"hidden index {j} out of range")
            coefficients[l, j] = c
            coefficient_mask[l, j] = True
    return PunnNetwork(
        k, class_count, exponents, exponent_mask,
        coefficients, coefficient_mask, biases,
    )


def deserialize_network(text: str) -> tuple[PunnNetwork, dict]:
    """Parse a serialized model; returns the network and the full document."""
    doc = json.loads(text)
    return network_from_document(doc), doc
