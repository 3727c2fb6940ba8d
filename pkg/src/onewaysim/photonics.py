"""Physical layer: encoding, source, noise, and measurement apparatus.

The four qubits live on two photons, each carrying a polarization and
a spatial (path) degree of freedom:

    qubit index   carrier                  logical 0 / 1
    0             photon B polarization    H / V
    1             photon A polarization    H / V
    2             photon A path            L / R
    3             photon B path            L / R

The source emits ((HH + VV) LL + e^{i theta} (HH - VV) RR)/2; at
theta = 0 this is exactly the linear cluster.  Imperfections are
modelled by independent phase damping on the two path qubits (the
interferometric arms) followed by an isotropic white noise admixture.

Measurement apparatus for one photon comes in three kinds:

    path_Z           path read in Z (which arm), polarization analyzed
    path_B_alpha     the two arms interfere on a beam splitter, giving
                     a B(alpha) path measurement; polarization analyzed
    path_and_pol_Z   both degrees of freedom read in Z

Outcome bit 0 always maps to the first label of a basis (H, L, R', +),
so a Pauli eigenvalue is (-1)**bit at every position.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .cluster import c4_state
from .qcore import (
    DensityMatrix,
    PauliString,
    State,
    StateVector,
    apply_gate,
    expectation,
    hadamard,
)

# ---------------------------------------------------------------------------
# reference values from the demonstration this package models
# ---------------------------------------------------------------------------

WITNESS_OBSERVABLES = ("XXIZ", "XXZI", "IIZZ", "IZXX", "ZIXX", "ZZII")

# measured stabilizer expectations (value, standard error)
REFERENCE_WITNESS_TERMS = {
    "XXIZ": (0.9070, 0.0036),
    "XXZI": (0.9076, 0.0035),
    "IIZZ": (0.9812, 0.0016),
    "IZXX": (0.9071, 0.0037),
    "ZIXX": (0.8911, 0.0040),
    "ZZII": (0.9372, 0.0030),
}
REFERENCE_WITNESS = (-0.766, 0.004)
REFERENCE_FIDELITY_BOUND = (0.883, 0.002)

REFERENCE_SEARCH_SUCCESS = (0.961, 0.002)
REFERENCE_SEARCH_NO_FEEDFORWARD = (0.249, 0.004)

# branch fidelities for outcomes (s2, s3), horseshoe then box layout
REFERENCE_HORSESHOE_FIDELITIES = {
    (0, 0): (0.954, 0.003),
    (0, 1): (0.940, 0.004),
    (1, 0): (0.936, 0.005),
    (1, 1): (0.910, 0.005),
}
REFERENCE_BOX_FIDELITIES = {
    (0, 0): (0.935, 0.005),
    (0, 1): (0.962, 0.004),
    (1, 0): (0.969, 0.003),
    (1, 1): (0.975, 0.003),
}

REFERENCE_VISIBILITIES = {
    "D1-D2": (0.842, 0.008),
    "D1-D4": (0.943, 0.006),
    "D3-D2": (0.968, 0.004),
    "D3-D4": (0.949, 0.006),
}

COINCIDENCE_RATE_HZ = 1.2e4


# ---------------------------------------------------------------------------
# encoding
# ---------------------------------------------------------------------------

_POL_LABELS = ("H", "V")
_PATH_LABELS = ("L", "R")


@dataclass(frozen=True)
class EncodingMap:
    """Assignment of register indices to physical carriers."""

    assignments: Tuple[Tuple[str, str], ...]  # index -> (photon, dof)

    def role(self, qubit: int) -> Tuple[str, str]:
        return self.assignments[qubit]

    def qubit_index(self, photon: str, dof: str) -> int:
        for i, (ph, d) in enumerate(self.assignments):
            if ph == photon and d == dof:
                return i
        raise KeyError(f"no qubit carries ({photon!r}, {dof!r})")

    def bit_labels(self, qubit: int) -> Tuple[str, str]:
        _, dof = self.assignments[qubit]
        return _POL_LABELS if dof == "polarization" else _PATH_LABELS

    def bits(self, pol_a: str, path_a: str, pol_b: str, path_b: str) -> str:
        """Basis bit string for a physical mode assignment."""
        values = {
            ("A", "polarization"): pol_a,
            ("A", "path"): path_a,
            ("B", "polarization"): pol_b,
            ("B", "path"): path_b,
        }
        bits = []
        for i, key in enumerate(self.assignments):
            labels = self.bit_labels(i)
            label = values[key]
            if label not in labels:
                raise ValueError(f"invalid label {label!r} for qubit {i}")
            bits.append(str(labels.index(label)))
        return "".join(bits)

    def labels(self, bits: str) -> Dict[str, str]:
        """Physical mode labels of a basis bit string."""
        if len(bits) != len(self.assignments) or any(b not in "01" for b in bits):
            raise ValueError(f"invalid bit string {bits!r}")
        out = {}
        for i, (photon, dof) in enumerate(self.assignments):
            out[f"{dof}_{photon}"] = self.bit_labels(i)[int(bits[i])]
        return out


ENCODING = EncodingMap(
    (
        ("B", "polarization"),
        ("A", "polarization"),
        ("A", "path"),
        ("B", "path"),
    )
)

_PATH_QUBITS = {"A": 2, "B": 3}
_POL_QUBITS = {"A": 1, "B": 0}


# ---------------------------------------------------------------------------
# source
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SourceParams:
    """Adjustable source settings; theta is the relative phase of the
    RR double pair against LL."""

    theta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")


def source_state(params: SourceParams) -> StateVector:
    """State emitted by the source: ((HH+VV)LL + e^{i theta}(HH-VV)RR)/2.

    At theta = 0 this equals the linear cluster state componentwise.
    """
    phase = np.exp(1j * params.theta)
    amps = np.zeros(16, dtype=complex)
    amps[0b0000] = 0.5
    amps[0b1100] = 0.5
    amps[0b0011] = 0.5 * phase
    amps[0b1111] = -0.5 * phase
    return StateVector(amps)


# ---------------------------------------------------------------------------
# noise
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseModel:
    """Phase damping of the two path qubits plus white noise.

    path_dephasing_a, path_dephasing_b
        Coherences involving the respective path qubit shrink by
        (1 - lambda).  Models arm length jitter of each interferometer.
    white_noise
        Admixture weight p of the maximally mixed state.
    """

    path_dephasing_a: float = 0.0
    path_dephasing_b: float = 0.0
    white_noise: float = 0.0

    def __post_init__(self):
        for name in ("path_dephasing_a", "path_dephasing_b", "white_noise"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")

    @classmethod
    def ideal(cls) -> "NoiseModel":
        return cls(0.0, 0.0, 0.0)

    def is_ideal(self) -> bool:
        return (
            self.path_dephasing_a == 0.0
            and self.path_dephasing_b == 0.0
            and self.white_noise == 0.0
        )


def apply_noise(ideal: State, model: NoiseModel) -> DensityMatrix:
    """Send a four-qubit state through the noise channel."""
    if ideal.num_qubits != 4:
        raise ValueError("the noise model is defined on the four-qubit register")
    if isinstance(ideal, StateVector):
        rho = np.outer(ideal.amplitudes, ideal.amplitudes.conj())
    else:
        rho = np.array(ideal.matrix)
    for photon, lam in (("A", model.path_dephasing_a), ("B", model.path_dephasing_b)):
        if lam == 0.0:
            continue
        qubit = _PATH_QUBITS[photon]
        bits = (np.arange(16) >> (3 - qubit)) & 1
        differ = bits[:, None] != bits[None, :]
        rho = np.where(differ, (1.0 - lam) * rho, rho)
    p = model.white_noise
    if p:
        rho = (1.0 - p) * rho + p * np.eye(16) / 16.0
    return DensityMatrix(rho)


def _stabilizer_terms(state: State) -> Tuple[float, ...]:
    return tuple(
        expectation(state, PauliString(word)) for word in WITNESS_OBSERVABLES
    )


def fit_noise(targets: Sequence[float]) -> Tuple[NoiseModel, float]:
    """Least-squares noise parameters for six measured stabilizer values.

    ``targets`` follows WITNESS_OBSERVABLES order.  The six values only
    determine the white noise weight and the product
    (1 - lambda_A)(1 - lambda_B); the returned model uses the gauge
    lambda_A = 0 with the whole path dephasing attributed to photon B.

    Returns (model, residual) with residual the summed squared misfit.
    """
    values = tuple(float(t) for t in targets)
    if len(values) != 6:
        raise ValueError("expected six target values")
    for v in values:
        if not (math.isfinite(v) and -1.0 <= v <= 1.0):
            raise ValueError(f"target {v!r} is not an expectation value")

    reference = c4_state()

    def misfit(product: float, white: float) -> float:
        model = NoiseModel(0.0, 1.0 - product, white)
        predicted = _stabilizer_terms(apply_noise(reference, model))
        return float(sum((a - b) ** 2 for a, b in zip(predicted, values)))

    # coarse grid, then coordinate descent with step halving
    grid = np.linspace(0.0, 1.0, 21)
    best = (math.inf, 1.0, 0.0)
    for product in grid:
        for white in grid:
            value = misfit(product, white)
            if value < best[0]:
                best = (value, float(product), float(white))
    value, product, white = best
    step = float(grid[1] - grid[0])
    while step >= 1e-6:
        moved = True
        while moved:
            moved = False
            for dq, dw in ((step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)):
                q = min(1.0, max(0.0, product + dq))
                w = min(1.0, max(0.0, white + dw))
                candidate = misfit(q, w)
                if candidate < value - 1e-15:
                    value, product, white = candidate, q, w
                    moved = True
        step /= 2.0
    return NoiseModel(0.0, 1.0 - product, white), value


# ---------------------------------------------------------------------------
# apparatus
# ---------------------------------------------------------------------------


def beam_splitter(state: State, path_qubit: int) -> State:
    """Interfere the two arms of one path qubit (a Hadamard on it).

    Output port 0 is labelled R', port 1 is L'.
    """
    if state.num_qubits == 4 and path_qubit not in _PATH_QUBITS.values():
        warnings.warn(
            f"qubit {path_qubit} is not a path mode of the four-qubit encoding",
            stacklevel=2,
        )
    return apply_gate(state, path_qubit, hadamard())


_APPARATUS_KINDS = ("path_Z", "path_B_alpha", "path_and_pol_Z")
_POL_BASES = ("HV", "PM")

_PROJ_Z = (
    np.diag([1.0, 0.0]).astype(complex),
    np.diag([0.0, 1.0]).astype(complex),
)
_PROJ_PM = (
    np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex),
    np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex),
)


def _proj_b_alpha(alpha: float) -> Tuple[np.ndarray, np.ndarray]:
    phase = np.exp(1j * alpha)
    plus = np.array([1.0, phase], dtype=complex) / math.sqrt(2)
    minus = np.array([1.0, -phase], dtype=complex) / math.sqrt(2)
    return np.outer(plus, plus.conj()), np.outer(minus, minus.conj())


@dataclass(frozen=True)
class ApparatusSetting:
    """Per-photon analysis configuration.

    kind selects how the path qubit is read; polarization_basis is the
    polarization analysis (HV or PM, i.e. +/-).  ``alpha`` is only
    meaningful (and required) for path_B_alpha, the beam splitter with
    a phase shifter in one input arm.
    """

    kind: str
    alpha: Optional[float] = None
    polarization_basis: str = "HV"

    def __post_init__(self):
        if self.kind not in _APPARATUS_KINDS:
            raise ValueError(f"unknown apparatus kind {self.kind!r}")
        if self.polarization_basis not in _POL_BASES:
            raise ValueError(
                f"polarization basis must be HV or PM, got {self.polarization_basis!r}"
            )
        if self.kind == "path_B_alpha":
            if self.alpha is None or not math.isfinite(self.alpha):
                raise ValueError("path_B_alpha needs a finite alpha")
        elif self.alpha is not None:
            raise ValueError(f"{self.kind} does not take an alpha")
        if self.kind == "path_and_pol_Z" and self.polarization_basis != "HV":
            raise ValueError("path_and_pol_Z reads polarization in H/V")

    def path_projectors(self) -> Dict[str, np.ndarray]:
        if self.kind == "path_B_alpha":
            p0, p1 = _proj_b_alpha(self.alpha)
            return {"R'": p0, "L'": p1}
        return {"L": _PROJ_Z[0], "R": _PROJ_Z[1]}

    def polarization_projectors(self) -> Dict[str, np.ndarray]:
        if self.polarization_basis == "PM":
            return {"+": _PROJ_PM[0], "-": _PROJ_PM[1]}
        return {"H": _PROJ_Z[0], "V": _PROJ_Z[1]}


def apparatus_projectors(setting: ApparatusSetting) -> Dict[Tuple[str, str], np.ndarray]:
    """Projectors of one photon's apparatus on its (path, pol) space.

    Keys are (path_label, pol_label); the 4x4 operators act on the
    two-qubit space with the path qubit as the most significant bit.
    """
    out = {}
    for path_label, path_proj in setting.path_projectors().items():
        for pol_label, pol_proj in setting.polarization_projectors().items():
            out[(path_label, pol_label)] = np.kron(path_proj, pol_proj)
    return out


WITNESS_SETTINGS: Dict[str, Tuple[ApparatusSetting, ApparatusSetting]] = {
    # polarizations along +/- and paths in Z: words XXIZ, XXZI, IIZZ
    "XXZZ": (
        ApparatusSetting("path_Z", polarization_basis="PM"),
        ApparatusSetting("path_Z", polarization_basis="PM"),
    ),
    # polarizations in H/V and paths interfered on beam splitters:
    # words IZXX, ZIXX, ZZII
    "ZZXX": (
        ApparatusSetting("path_B_alpha", alpha=0.0, polarization_basis="HV"),
        ApparatusSetting("path_B_alpha", alpha=0.0, polarization_basis="HV"),
    ),
}


def _register_projectors(settings: Tuple[ApparatusSetting, ApparatusSetting]):
    """Per-qubit (outcome0, outcome1) projector pairs in register order."""
    setting_a, setting_b = settings
    pol_a = tuple(setting_a.polarization_projectors().values())
    pol_b = tuple(setting_b.polarization_projectors().values())
    path_a = tuple(setting_a.path_projectors().values())
    path_b = tuple(setting_b.path_projectors().values())
    return (pol_b, pol_a, path_a, path_b)


def joint_distribution(
    state: State, settings: Tuple[ApparatusSetting, ApparatusSetting]
) -> Dict[str, float]:
    """Probabilities of the 16 coincidence outcomes for a setting pair.

    Keys are bit strings in register order (qubits 1..4); bit 0 stands
    for the first label of each basis, so eigenvalue signs follow
    (-1)**bit.
    """
    if state.num_qubits != 4:
        raise ValueError("joint distribution is defined on the four-qubit register")
    families = _register_projectors(settings)
    out = {}
    for index in range(16):
        bits = [(index >> (3 - q)) & 1 for q in range(4)]
        op = np.array([[1.0 + 0j]])
        for q in range(4):
            op = np.kron(op, families[q][bits[q]])
        if isinstance(state, StateVector):
            value = np.vdot(state.amplitudes, op @ state.amplitudes).real
        else:
            value = np.trace(op @ state.matrix).real
        out["".join(map(str, bits))] = float(max(value, 0.0))
    return out


def joint_outcome_labels(
    settings: Tuple[ApparatusSetting, ApparatusSetting]
) -> Dict[str, Tuple[str, str, str, str]]:
    """Physical labels of each joint outcome key, in register order."""
    setting_a, setting_b = settings
    label_sets = (
        tuple(setting_b.polarization_projectors()),
        tuple(setting_a.polarization_projectors()),
        tuple(setting_a.path_projectors()),
        tuple(setting_b.path_projectors()),
    )
    out = {}
    for index in range(16):
        bits = [(index >> (3 - q)) & 1 for q in range(4)]
        out["".join(map(str, bits))] = tuple(
            label_sets[q][bits[q]] for q in range(4)
        )
    return out


# ---------------------------------------------------------------------------
# interference fringes
# ---------------------------------------------------------------------------

# detector name -> (photon, output port bit after the beam splitter)
_DETECTORS = {"D1": ("A", 0), "D3": ("A", 1), "D2": ("B", 0), "D4": ("B", 1)}

DETECTOR_PAIRS = ("D1-D2", "D1-D4", "D3-D2", "D3-D4")


def _parse_pair(detector_pair: str) -> Tuple[int, int]:
    if detector_pair not in DETECTOR_PAIRS:
        raise ValueError(
            f"detector pair must be one of {DETECTOR_PAIRS}, got {detector_pair!r}"
        )
    name_a, name_b = detector_pair.split("-")
    return _DETECTORS[name_a][1], _DETECTORS[name_b][1]


def visibility_fringe(model: NoiseModel, detector_pair: str, theta: float) -> float:
    """Coincidence probability of one H-detector pair at source phase theta.

    Both paths interfere on their beam splitters and both polarizations
    are analyzed along H; the pair selects one output port per photon.
    """
    port_a, port_b = _parse_pair(detector_pair)
    rho = apply_noise(source_state(SourceParams(theta)), model)
    probe: State = beam_splitter(rho, _PATH_QUBITS["A"])
    probe = beam_splitter(probe, _PATH_QUBITS["B"])
    op = np.array([[1.0 + 0j]])
    for proj in (
        _PROJ_Z[0],            # photon B polarization = H
        _PROJ_Z[0],            # photon A polarization = H
        _PROJ_Z[port_a],       # photon A output port
        _PROJ_Z[port_b],       # photon B output port
    ):
        op = np.kron(op, proj)
    return float(np.trace(op @ probe.matrix).real)


@dataclass(frozen=True)
class VisibilityScan:
    """Sampled fringe of one detector pair over a full phase turn."""

    detector_pair: str
    thetas: Tuple[float, ...]
    probabilities: Tuple[float, ...]
    visibility: float


def visibility_scan(
    model: NoiseModel, detector_pair: str, samples: int = 24
) -> VisibilityScan:
    """Scan the source phase and report the fringe visibility.

    Visibility is (max - min)/(max + min) over the sampled fringe; even
    ``samples`` counts include both extremes of this source exactly.
    """
    if samples < 4:
        raise ValueError("need at least four samples per turn")
    thetas = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    probs = [visibility_fringe(model, detector_pair, t) for t in thetas]
    top, bottom = max(probs), min(probs)
    visibility = (top - bottom) / (top + bottom)
    return VisibilityScan(
        detector_pair=detector_pair,
        thetas=tuple(float(t) for t in thetas),
        probabilities=tuple(probs),
        visibility=float(visibility),
    )
