"""Tests for the photonic encoding, source, noise channel, and apparatus."""

import math
import warnings

import numpy as np
import pytest

from onewaysim.cluster import c4_state
from onewaysim.photonics import (
    COINCIDENCE_RATE_HZ,
    DETECTOR_PAIRS,
    ENCODING,
    REFERENCE_VISIBILITIES,
    REFERENCE_WITNESS_TERMS,
    WITNESS_OBSERVABLES,
    WITNESS_SETTINGS,
    ApparatusSetting,
    NoiseModel,
    SourceParams,
    apparatus_projectors,
    apply_noise,
    beam_splitter,
    fit_noise,
    joint_distribution,
    joint_outcome_labels,
    source_state,
    visibility_fringe,
    visibility_scan,
)
from onewaysim.qcore import (
    DensityMatrix,
    PauliString,
    StateVector,
    expectation,
    ket,
)

from conftest import random_state


# ---------------------------------------------------------------------------
# encoding
# ---------------------------------------------------------------------------


def test_encoding_roles():
    assert ENCODING.role(0) == ("B", "polarization")
    assert ENCODING.role(1) == ("A", "polarization")
    assert ENCODING.role(2) == ("A", "path")
    assert ENCODING.role(3) == ("B", "path")
    assert ENCODING.qubit_index("A", "path") == 2
    with pytest.raises(KeyError):
        ENCODING.qubit_index("C", "path")


def test_encoding_bits_and_labels():
    assert ENCODING.bits("H", "L", "H", "L") == "0000"
    # idx0 = pol B, idx1 = pol A, idx2 = path A, idx3 = path B
    assert ENCODING.bits("V", "R", "H", "L") == "0110"
    labels = ENCODING.labels("0110")
    assert labels == {
        "polarization_B": "H",
        "polarization_A": "V",
        "path_A": "R",
        "path_B": "L",
    }
    with pytest.raises(ValueError):
        ENCODING.bits("X", "L", "H", "L")
    with pytest.raises(ValueError):
        ENCODING.labels("01")


# ---------------------------------------------------------------------------
# source
# ---------------------------------------------------------------------------


def test_source_matches_cluster_at_zero_phase():
    assert np.allclose(source_state(SourceParams(0.0)).amplitudes, c4_state().amplitudes)


def test_source_phase_moves_only_the_rr_pair():
    amps = source_state(SourceParams(math.pi)).amplitudes
    expected = np.zeros(16, dtype=complex)
    expected[0b0000] = 0.5
    expected[0b1100] = 0.5
    expected[0b0011] = -0.5
    expected[0b1111] = 0.5
    assert np.allclose(amps, expected)


def test_source_phase_rotates_the_path_coherence_terms():
    # words without X on the path qubits are insensitive to theta
    for theta in (0.0, 0.7, math.pi / 2, math.pi):
        psi = source_state(SourceParams(theta))
        for word in ("XXIZ", "XXZI", "IIZZ", "ZZII"):
            assert expectation(psi, PauliString(word)) == pytest.approx(1.0, abs=1e-12)
        for word in ("IZXX", "ZIXX"):
            assert expectation(psi, PauliString(word)) == pytest.approx(
                math.cos(theta), abs=1e-12
            )
    with pytest.raises(ValueError):
        SourceParams(float("inf"))


# ---------------------------------------------------------------------------
# noise channel
# ---------------------------------------------------------------------------


def _reference_noise(ideal: np.ndarray, model: NoiseModel) -> np.ndarray:
    """Elementwise restatement of the channel, as an independent oracle."""
    out = ideal.astype(complex).copy()
    for i in range(16):
        for j in range(16):
            if (i >> 1) & 1 != (j >> 1) & 1:  # path A is bit 1 from the right
                out[i, j] *= 1.0 - model.path_dephasing_a
            if i & 1 != j & 1:  # path B is the least significant bit
                out[i, j] *= 1.0 - model.path_dephasing_b
    return (1.0 - model.white_noise) * out + model.white_noise * np.eye(16) / 16.0


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(white_noise=1.5)
    with pytest.raises(ValueError):
        NoiseModel(path_dephasing_a=-0.1)
    assert NoiseModel.ideal().is_ideal()
    assert not NoiseModel(0.0, 0.0, 0.1).is_ideal()


def test_apply_noise_matches_elementwise_reference(rng):
    for _ in range(15):
        psi = random_state(rng, 4)
        model = NoiseModel(*(float(v) for v in rng.uniform(0.0, 0.6, size=3)))
        rho = apply_noise(psi, model)
        ideal = np.outer(psi.amplitudes, psi.amplitudes.conj())
        assert np.allclose(rho.matrix, _reference_noise(ideal, model), atol=1e-12)


def test_apply_noise_ideal_model_is_identity():
    psi = c4_state()
    rho = apply_noise(psi, NoiseModel.ideal())
    assert np.allclose(rho.matrix, np.outer(psi.amplitudes, psi.amplitudes.conj()))


def test_apply_noise_accepts_density_input(rng):
    psi = random_state(rng, 4)
    model = NoiseModel(0.2, 0.1, 0.05)
    from_pure = apply_noise(psi, model)
    from_mixed = apply_noise(DensityMatrix.from_state(psi), model)
    assert np.allclose(from_pure.matrix, from_mixed.matrix)


def test_apply_noise_requires_four_qubits():
    with pytest.raises(ValueError):
        apply_noise(ket("00"), NoiseModel.ideal())


def test_noise_pauli_transfer_factors(rng):
    # every Pauli word scales by (1-p) times (1-lambda) per path qubit
    # on which the word has an off-diagonal letter
    letters = "IXYZ"
    for _ in range(40):
        psi = random_state(rng, 4)
        word = "".join(rng.choice(list(letters)) for _ in range(4))
        if word == "IIII":
            continue
        model = NoiseModel(*(float(v) for v in rng.uniform(0.0, 0.8, size=3)))
        factor = 1.0 - model.white_noise
        if word[2] in "XY":
            factor *= 1.0 - model.path_dephasing_a
        if word[3] in "XY":
            factor *= 1.0 - model.path_dephasing_b
        raw = expectation(psi, PauliString(word))
        noisy = expectation(apply_noise(psi, model), PauliString(word))
        assert noisy == pytest.approx(factor * raw, abs=1e-10)


# ---------------------------------------------------------------------------
# noise fit
# ---------------------------------------------------------------------------


def _closed_form_fit(targets):
    """Separable least-squares solution used as the oracle.

    Four of the six words see only the white-noise factor b = 1 - p, the
    other two see b*q with q the dephasing product, so the optimum is
    b = mean of the four, b*q = mean of the two.
    """
    flat = [targets[w] for w in ("XXIZ", "XXZI", "IIZZ", "ZZII")]
    mixed = [targets[w] for w in ("IZXX", "ZIXX")]
    b = sum(flat) / 4.0
    bq = sum(mixed) / 2.0
    residual = sum((b - t) ** 2 for t in flat) + sum((bq - t) ** 2 for t in mixed)
    return b, bq / b, residual


def test_fit_noise_reference_targets():
    targets = {w: REFERENCE_WITNESS_TERMS[w][0] for w in WITNESS_OBSERVABLES}
    model, residual = fit_noise([targets[w] for w in WITNESS_OBSERVABLES])
    b, q, expected_residual = _closed_form_fit(targets)
    assert model.path_dephasing_a == 0.0  # gauge choice
    assert model.white_noise == pytest.approx(1.0 - b, abs=2e-4)
    assert 1.0 - model.path_dephasing_b == pytest.approx(q, abs=2e-4)
    assert residual == pytest.approx(expected_residual, abs=1e-5)


def test_fit_noise_exact_recovery():
    # targets generated by the channel itself must fit with ~zero residual
    truth = NoiseModel(0.0, 0.05, 0.08)
    rho = apply_noise(c4_state(), truth)
    targets = [expectation(rho, PauliString(w)) for w in WITNESS_OBSERVABLES]
    model, residual = fit_noise(targets)
    assert model.path_dephasing_b == pytest.approx(0.05, abs=1e-4)
    assert model.white_noise == pytest.approx(0.08, abs=1e-4)
    assert residual < 1e-8


def test_fit_noise_validation():
    with pytest.raises(ValueError):
        fit_noise([0.9] * 5)
    with pytest.raises(ValueError):
        fit_noise([0.9, 0.9, 0.9, 0.9, 0.9, 1.3])


# ---------------------------------------------------------------------------
# apparatus
# ---------------------------------------------------------------------------


def test_apparatus_setting_validation():
    with pytest.raises(ValueError):
        ApparatusSetting("bogus")
    with pytest.raises(ValueError):
        ApparatusSetting("path_B_alpha")  # alpha required
    with pytest.raises(ValueError):
        ApparatusSetting("path_Z", alpha=0.3)  # alpha forbidden
    with pytest.raises(ValueError):
        ApparatusSetting("path_and_pol_Z", polarization_basis="PM")
    with pytest.raises(ValueError):
        ApparatusSetting("path_Z", polarization_basis="XY")


def test_apparatus_projector_labels():
    z_setting = ApparatusSetting("path_Z", polarization_basis="PM")
    assert tuple(z_setting.path_projectors()) == ("L", "R")
    assert tuple(z_setting.polarization_projectors()) == ("+", "-")
    bs_setting = ApparatusSetting("path_B_alpha", alpha=0.0)
    assert tuple(bs_setting.path_projectors()) == ("R'", "L'")
    assert tuple(bs_setting.polarization_projectors()) == ("H", "V")


@pytest.mark.parametrize(
    "setting",
    [
        ApparatusSetting("path_Z", polarization_basis="PM"),
        ApparatusSetting("path_B_alpha", alpha=0.0),
        ApparatusSetting("path_B_alpha", alpha=1.1, polarization_basis="PM"),
        ApparatusSetting("path_and_pol_Z"),
    ],
)
def test_apparatus_projectors_complete_and_idempotent(setting):
    projs = apparatus_projectors(setting)
    assert len(projs) == 4
    total = sum(projs.values())
    assert np.allclose(total, np.eye(4))
    for op in projs.values():
        assert np.allclose(op @ op, op)
        assert np.allclose(op, op.conj().T)


def test_b_alpha_at_zero_equals_plus_minus():
    setting = ApparatusSetting("path_B_alpha", alpha=0.0)
    p0, p1 = setting.path_projectors().values()
    assert np.allclose(p0, np.full((2, 2), 0.5))
    assert np.allclose(p1, np.array([[0.5, -0.5], [-0.5, 0.5]]))


def test_beam_splitter_warns_off_path():
    psi = c4_state()
    with pytest.warns(UserWarning):
        beam_splitter(psi, 1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        beam_splitter(psi, 2)
        beam_splitter(psi, 3)
        beam_splitter(ket("01"), 0)  # small registers are unconstrained


# ---------------------------------------------------------------------------
# joint outcome distributions
# ---------------------------------------------------------------------------


def _word_sign(word: str, key: str) -> int:
    sign = 1
    for letter, bit in zip(word, key):
        if letter != "I" and bit == "1":
            sign = -sign
    return sign


_SETTING_WORDS = {
    "XXZZ": ("XXIZ", "XXZI", "IIZZ"),
    "ZZXX": ("IZXX", "ZIXX", "ZZII"),
}


def test_joint_distribution_normalization(rng):
    for name, settings in WITNESS_SETTINGS.items():
        for _ in range(5):
            psi = random_state(rng, 4)
            dist = joint_distribution(psi, settings)
            assert len(dist) == 16
            assert sum(dist.values()) == pytest.approx(1.0, abs=1e-10)
            assert all(v >= 0.0 for v in dist.values())


def test_joint_distribution_reproduces_expectations(rng):
    # signed sums over the coincidence distribution must equal the
    # operator expectation values for every word the setting measures
    for name, settings in WITNESS_SETTINGS.items():
        for _ in range(8):
            psi = random_state(rng, 4)
            dist = joint_distribution(psi, settings)
            for word in _SETTING_WORDS[name]:
                signed = sum(_word_sign(word, k) * v for k, v in dist.items())
                assert signed == pytest.approx(
                    expectation(psi, PauliString(word)), abs=1e-10
                )


def test_joint_distribution_on_mixed_states(rng):
    psi = random_state(rng, 4)
    rho = apply_noise(psi, NoiseModel(0.1, 0.2, 0.15))
    for name, settings in WITNESS_SETTINGS.items():
        dist = joint_distribution(rho, settings)
        assert sum(dist.values()) == pytest.approx(1.0, abs=1e-10)
        for word in _SETTING_WORDS[name]:
            signed = sum(_word_sign(word, k) * v for k, v in dist.items())
            assert signed == pytest.approx(
                expectation(rho, PauliString(word)), abs=1e-10
            )


def test_joint_distribution_requires_four_qubits():
    with pytest.raises(ValueError):
        joint_distribution(ket("00"), WITNESS_SETTINGS["XXZZ"])


def test_joint_outcome_labels():
    labels = joint_outcome_labels(WITNESS_SETTINGS["XXZZ"])
    # register order: pol B, pol A, path A, path B
    assert labels["0000"] == ("+", "+", "L", "L")
    assert labels["1101"] == ("-", "-", "L", "R")
    labels = joint_outcome_labels(WITNESS_SETTINGS["ZZXX"])
    assert labels["0000"] == ("H", "H", "R'", "R'")
    assert labels["0011"] == ("H", "H", "L'", "L'")


def test_ideal_cluster_coincidences_are_half_even_parity():
    # on the ideal state each setting shows the stabilizer correlations
    dist = joint_distribution(c4_state(), WITNESS_SETTINGS["XXZZ"])
    for word in _SETTING_WORDS["XXZZ"]:
        signed = sum(_word_sign(word, k) * v for k, v in dist.items())
        assert signed == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# interference fringes
# ---------------------------------------------------------------------------


_PAIR_SIGNS = {"D1-D2": 1.0, "D1-D4": -1.0, "D3-D2": -1.0, "D3-D4": 1.0}


def _fringe_formula(model: NoiseModel, pair: str, theta: float) -> float:
    p = model.white_noise
    q = (1.0 - model.path_dephasing_a) * (1.0 - model.path_dephasing_b)
    return (1.0 - p) / 8.0 * (1.0 + _PAIR_SIGNS[pair] * q * math.cos(theta)) + p / 16.0


def test_fringe_matches_closed_form(rng):
    for _ in range(12):
        model = NoiseModel(*(float(v) for v in rng.uniform(0.0, 0.5, size=3)))
        theta = float(rng.uniform(0.0, 2.0 * math.pi))
        for pair in DETECTOR_PAIRS:
            assert visibility_fringe(model, pair, theta) == pytest.approx(
                _fringe_formula(model, pair, theta), abs=1e-12
            )


def test_fringe_pair_signs():
    ideal = NoiseModel.ideal()
    assert visibility_fringe(ideal, "D1-D2", 0.0) > visibility_fringe(
        ideal, "D1-D2", math.pi
    )
    assert visibility_fringe(ideal, "D1-D4", 0.0) < visibility_fringe(
        ideal, "D1-D4", math.pi
    )
    with pytest.raises(ValueError):
        visibility_fringe(ideal, "D2-D1", 0.0)


def test_visibility_scan_closed_form(rng):
    for _ in range(6):
        model = NoiseModel(*(float(v) for v in rng.uniform(0.0, 0.4, size=3)))
        p = model.white_noise
        q = (1.0 - model.path_dephasing_a) * (1.0 - model.path_dephasing_b)
        expected = q * (1.0 - p) / (1.0 - p / 2.0)
        scan = visibility_scan(model, "D3-D2", samples=24)
        assert scan.visibility == pytest.approx(expected, abs=1e-12)
        assert len(scan.thetas) == 24 and len(scan.probabilities) == 24


def test_visibility_scan_ideal_is_unity():
    scan = visibility_scan(NoiseModel.ideal(), "D1-D2", samples=8)
    assert scan.visibility == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        visibility_scan(NoiseModel.ideal(), "D1-D2", samples=3)


def test_reference_tables_are_consistent():
    assert tuple(REFERENCE_VISIBILITIES) == DETECTOR_PAIRS
    assert tuple(REFERENCE_WITNESS_TERMS) == WITNESS_OBSERVABLES
    assert COINCIDENCE_RATE_HZ > 0
    for value, err in REFERENCE_WITNESS_TERMS.values():
        assert 0.0 < value < 1.0 and err > 0.0
