import numpy as np
import pytest
from hypothesis import given, strategies as st

from fmgn import (
    ChannelModel,
    Constellation,
    NoiseParams,
    SymbolBlock,
    detect_ml_genie,
    detect_nearest,
    modulate,
    transmit,
)
from fmgn.channel import window_energy_sums
from fmgn.modem import bits_for_indices, detect_nearest_bruteforce

# Grid positions (row-major over ascending real/imag levels) and the Gray
# labels they must carry: first two bits follow the real axis, last two the
# imaginary axis, both in 00, 01, 11, 10 order.
EXPECTED_LABELS = [
    0b0000, 0b0001, 0b0011, 0b0010,
    0b0100, 0b0101, 0b0111, 0b0110,
    0b1100, 0b1101, 0b1111, 0b1110,
    0b1000, 0b1001, 0b1011, 0b1010,
]


@pytest.fixture(scope="module")
def qam():
    return Constellation.qam16(scale=1.0)


class TestQam16Geometry:
    def test_points_form_the_grid(self, qam):
        expected = {complex(a, b) for a in (-3, -1, 1, 3) for b in (-3, -1, 1, 3)}
        assert set(map(complex, qam.points)) == expected

    def test_average_power_is_ten_scale_squared(self):
        c = Constellation.qam16(scale=0.02)
        assert c.average_power == pytest.approx(10 * 0.02**2, rel=1e-12)
        c2 = Constellation.qam16(average_power=2.5e-3)
        assert c2.average_power == pytest.approx(2.5e-3, rel=1e-12)

    def test_minimum_distance_is_twice_scale(self, qam):
        d = np.abs(qam.points[:, None] - qam.points[None, :])
        np.fill_diagonal(d, np.inf)
        assert d.min() == pytest.approx(2.0, rel=1e-12)

    def test_labels_golden_fixture(self, qam):
        assert qam.labels.tolist() == EXPECTED_LABELS

    def test_energy_rings(self, qam):
        energy = np.abs(qam.points) ** 2
        assert sorted(np.where(np.isclose(energy, 2))[0].tolist()) == [5, 6, 9, 10]
        assert sorted(np.where(np.isclose(energy, 18))[0].tolist()) == [0, 3, 12, 15]
        assert np.isclose(energy, 10).sum() == 8

    def test_gray_property_between_adjacent_cells(self, qam):
        # neighbors at the minimum distance differ in exactly one label bit
        for i in range(16):
            for j in range(16):
                if i != j and abs(qam.points[i] - qam.points[j]) == pytest.approx(2.0):
                    diff = int(qam.labels[i]) ^ int(qam.labels[j])
                    assert bin(diff).count("1") == 1


class TestModulate:
    def test_all_zero_bits_map_to_outer_corner(self, qam):
        sym = modulate(np.zeros(4, dtype=int), qam)
        assert sym[0] == complex(-3, -3)

    def test_round_trip_is_identity(self, qam):
        rng = np.random.default_rng(3)
        bits = rng.integers(0, 2, size=4 * 1000)
        symbols = modulate(bits, qam)
        decided = detect_nearest(symbols, qam)
        assert np.array_equal(bits_for_indices(decided, qam), bits)

    def test_all_sixteen_points_average_power(self, qam):
        bits = np.array([(v >> k) & 1 for v in range(16) for k in (3, 2, 1, 0)])
        symbols = modulate(bits, qam)
        assert np.mean(np.abs(symbols) ** 2) == pytest.approx(10.0, rel=1e-12)

    def test_rejects_ragged_bit_count(self, qam):
        with pytest.raises(ValueError):
            modulate(np.zeros(6, dtype=int), qam)

    def test_qpsk_round_trip(self):
        qpsk = Constellation.qpsk(average_power=2e-3)
        assert qpsk.average_power == pytest.approx(2e-3, rel=1e-12)
        rng = np.random.default_rng(4)
        bits = rng.integers(0, 2, size=2 * 500)
        decided = detect_nearest(modulate(bits, qpsk), qpsk)
        assert np.array_equal(bits_for_indices(decided, qpsk), bits)


class TestDetectNearest:
    def test_own_point_detected(self, qam):
        assert np.array_equal(detect_nearest(qam.points, qam), np.arange(16))

    def test_origin_tie_breaks_to_lowest_index(self, qam):
        assert detect_nearest(np.array([0j]), qam)[0] == 5
        assert detect_nearest_bruteforce(np.array([0j]), qam)[0] == 5

    def test_threshold_ties_match_bruteforce(self, qam):
        ties = np.array(
            [0j, -2 + 0j, 2 + 0j, 0 - 2j, 2 + 2j, -2 - 2j, 3 + 2j, -2 + 1j]
        )
        assert np.array_equal(
            detect_nearest(ties, qam), detect_nearest_bruteforce(ties, qam)
        )

    def test_agreement_with_bruteforce_on_random_box(self, qam):
        rng = np.random.default_rng(11)
        y = rng.uniform(-5, 5, size=(1_000_000, 2)) @ np.array([1, 1j])
        assert np.array_equal(detect_nearest(y, qam), detect_nearest_bruteforce(y, qam))

    @given(
        st.floats(min_value=0.01, max_value=100.0),
        st.floats(min_value=-6, max_value=6),
        st.floats(min_value=-6, max_value=6),
    )
    def test_scale_equivariance(self, c, re, im):
        base = Constellation.qam16(scale=1.0)
        scaled = Constellation.qam16(scale=c)
        y = complex(re, im)
        assert detect_nearest(np.array([c * y]), scaled)[0] == detect_nearest(
            np.array([y]), base
        )[0]


class TestGenieMl:
    def test_reduces_to_med_without_nonlinearity(self, qam):
        noise = NoiseParams(1e-2, 0.0)
        rng = np.random.default_rng(12)
        y = rng.uniform(-5, 5, 20_000) + 1j * rng.uniform(-5, 5, 20_000)
        ne = rng.uniform(0, 50, 20_000)
        ml = detect_ml_genie(y, ne, qam, memory=4, noise=noise)
        assert np.array_equal(ml, detect_nearest(y, qam))

    def test_rejects_negative_neighbor_energy(self, qam, reference_noise):
        with pytest.raises(ValueError):
            detect_ml_genie(np.array([1j]), np.array([-1.0]), qam, 1, reference_noise)

    def _agreement_rate(self, memory, power_dbm, n, reference_noise, seed=202):
        power = 1e-3 * 10 ** (power_dbm / 10)
        const = Constellation.qam16(average_power=power)
        rng = np.random.default_rng(seed)
        sent = rng.integers(0, 16, n)
        x = const.points[sent]
        model = ChannelModel.finite_memory(reference_noise, memory)
        y = transmit(SymbolBlock(x), model, seed=seed).symbols
        p2 = np.abs(x) ** 2
        ne = window_energy_sums(p2, memory, "wrap") - p2
        med = detect_nearest(y, const)
        ml = detect_ml_genie(y, ne, const, memory, reference_noise)
        return np.mean(med == ml)

    def test_large_memory_agreement_with_med(self, reference_noise):
        rate = self._agreement_rate(50, 0.0, 100_000, reference_noise)
        assert rate >= 0.999

    def test_small_memory_high_power_deviates(self, reference_noise):
        rate = self._agreement_rate(1, 5.0, 100_000, reference_noise)
        assert rate < 0.999

    def test_agreement_increases_with_memory(self, reference_noise):
        rates = [
            self._agreement_rate(memory, 4.0, 50_000, reference_noise)
            for memory in (1, 5, 50)
        ]
        assert rates[0] < rates[1] <= rates[2]


class TestConstellationValidation:
    def test_rejects_bad_label_permutation(self):
        with pytest.raises(ValueError):
            Constellation("x", np.array([1 + 0j, -1 + 0j]), np.array([0, 2]))

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            Constellation("x", np.array([1 + 0j, -1 + 0j, 1j]), np.array([0, 1, 2]))

    def test_qam16_requires_exactly_one_size_argument(self):
        with pytest.raises(ValueError):
            Constellation.qam16()
        with pytest.raises(ValueError):
            Constellation.qam16(scale=1.0, average_power=1.0)
