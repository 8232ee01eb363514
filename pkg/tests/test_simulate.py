"""Synthetic contact model: band geometry, dataset shape, file round-trips."""

import numpy as np
import pytest

from tiltxter.core import TILT_DEGREES, class_of_degrees, quantize_force
from tiltxter.simulate import (
    ContactParams,
    DatasetFormatError,
    gen_dataset,
    read_dataset,
    render_contact,
    split_dataset,
    write_dataset,
)

QUIET = ContactParams(noise_sigma=0.0, jitter=0.0)


def oracle_band(angle_deg, center_rc, sigma, amplitude):
    """Per-taxel scalar rasterizer of the band equation, written separately
    from the vectorized production path."""
    out = np.zeros((10, 10))
    theta = np.deg2rad(angle_deg)
    for r in range(10):
        for c in range(10):
            d = (c - center_rc[1]) * np.sin(theta) + (r - center_rc[0]) * np.cos(theta)
            out[r, c] = amplitude * np.exp(-(d ** 2) / (2 * sigma ** 2))
    return out


def principal_axis_deg(grid):
    """Orientation of the force distribution via image second moments."""
    total = grid.sum()
    rr, cc = np.meshgrid(np.arange(10), np.arange(10), indexing="ij")
    r0 = (grid * rr).sum() / total
    c0 = (grid * cc).sum() / total
    mrr = (grid * (rr - r0) ** 2).sum()
    mcc = (grid * (cc - c0) ** 2).sum()
    mrc = (grid * (rr - r0) * (cc - c0)).sum()
    # eigenvector of [[mcc, mrc], [mrc, mrr]] for the larger eigenvalue,
    # expressed as an angle from horizontal with rows growing downward
    angle = 0.5 * np.degrees(np.arctan2(-2 * mrc, mcc - mrr))
    return angle


def angle_gap(a, b):
    d = abs(a - b) % 180.0
    return min(d, 180.0 - d)


class TestRenderContact:
    def test_horizontal_band_row_structure(self):
        bf = render_contact(class_of_degrees(0), 30, QUIET)
        forces = bf.right.forces
        row_sums = forces.sum(axis=1)
        assert {int(i) for i in np.argsort(row_sums)[-2:]} == {4, 5}
        assert np.max(np.abs(forces - forces[:, :1])) <= 1e-12  # constant per row

    def test_plus_minus_90_identical(self):
        a = render_contact(class_of_degrees(90), 12, QUIET, entropy=3)
        b = render_contact(class_of_degrees(-90), 12, QUIET, entropy=3)
        assert np.array_equal(a.right.forces, b.right.forces)
        assert np.array_equal(a.left.forces, b.left.forces)

    def test_matches_independent_rasterizer(self):
        for deg in TILT_DEGREES:
            bf = render_contact(class_of_degrees(deg), 20, QUIET)
            expect = oracle_band(deg, (4.5, 4.5), QUIET.sigma(20), QUIET.curve(20))
            assert np.max(np.abs(bf.right.forces - expect)) <= 1e-12
            assert np.max(np.abs(bf.left.forces - expect)) <= 1e-12

    def test_45_is_transpose_flip_of_minus_45(self):
        """A +45 band is the transpose-then-column-flip of a -45 band when
        the center offset is carried through the same transform."""
        offset = (0.4, -0.3)
        plus = render_contact(class_of_degrees(45), 10,
                              ContactParams(noise_sigma=0, jitter=0, center_offset=offset))
        # transpose maps (r, c) -> (c, r); column flip then maps c -> 9 - c,
        # so the pivot offset (dr, dc) lands at (dc, -dr).
        mirrored_offset = (offset[1], -offset[0])
        minus = render_contact(class_of_degrees(-45), 10,
                               ContactParams(noise_sigma=0, jitter=0, center_offset=mirrored_offset))
        transformed = plus.right.forces.T[:, ::-1]
        assert np.max(np.abs(transformed - minus.right.forces)) <= 1e-12

    def test_monotone_total_force_in_closure(self):
        totals = [render_contact(class_of_degrees(30), g, QUIET).right.forces.sum()
                  for g in range(31)]
        assert all(b >= a for a, b in zip(totals, totals[1:]))

    def test_angle_fidelity_all_classes(self):
        """Second-moment principal axis within 3 deg of nominal, all classes
        and closure extremes, checked by the independent moment oracle."""
        for deg in TILT_DEGREES:
            for gripper in (0, 15, 30):
                bf = render_contact(class_of_degrees(deg), gripper, QUIET)
                est = principal_axis_deg(bf.right.forces)
                assert angle_gap(est, deg) <= 3.0, (deg, gripper, est)

    def test_deterministic(self):
        p = ContactParams(rng_seed=11)
        a = render_contact(class_of_degrees(60), 7, p, entropy=5)
        b = render_contact(class_of_degrees(60), 7, p, entropy=5)
        assert np.array_equal(a.left.forces, b.left.forces)
        assert np.array_equal(a.right.forces, b.right.forces)

    def test_left_right_noise_independent(self):
        bf = render_contact(class_of_degrees(0), 15, ContactParams(jitter=0.0))
        assert not np.array_equal(bf.left.forces, bf.right.forces)

    def test_rejects_bad_closure(self):
        with pytest.raises(ValueError):
            render_contact(class_of_degrees(0), 31, QUIET)

    def test_label_attached(self):
        bf = render_contact(class_of_degrees(-30), 4, QUIET)
        assert bf.tilt == class_of_degrees(-30)
        assert bf.gripper_pos == 4


class TestGenDataset:
    def test_default_size(self):
        records = gen_dataset(ContactParams(), reps_per_cell=1)
        assert len(records) == 279  # 9 x 31

    def test_label_histogram_uniform(self):
        records = gen_dataset(ContactParams(), reps_per_cell=2)
        counts = np.bincount([r.label.index for r in records], minlength=9)
        assert np.all(counts == 62)  # 31 x 2 per class

    def test_cell_occupancy(self):
        records = gen_dataset(ContactParams(), reps_per_cell=3)
        cells = {}
        for r in records:
            cells[(r.label.index, r.gripper_pos)] = cells.get((r.label.index, r.gripper_pos), 0) + 1
        assert set(cells.values()) == {3}

    def test_sample_ids_sequential(self):
        records = gen_dataset(ContactParams(), reps_per_cell=1)
        assert [r.sample_id for r in records] == list(range(len(records)))

    def test_regeneration_bit_identical(self):
        a = gen_dataset(ContactParams(rng_seed=5), reps_per_cell=1)
        b = gen_dataset(ContactParams(rng_seed=5), reps_per_cell=1)
        for ra, rb in zip(a, b):
            assert np.array_equal(ra.biframe.left.forces, rb.biframe.left.forces)
            assert np.array_equal(ra.biframe.right.forces, rb.biframe.right.forces)

    def test_rejects_zero_reps(self):
        with pytest.raises(ValueError):
            gen_dataset(ContactParams(), reps_per_cell=0)


@pytest.fixture(scope="module")
def records():
    return gen_dataset(ContactParams(rng_seed=1), reps_per_cell=4)  # 1116 records


class TestSplit:
    def test_sizes_50_25_25(self, records):
        train, val, test = split_dataset(records, seed=3)
        assert (len(train), len(val), len(test)) == (558, 279, 279)

    def test_disjoint_and_complete(self, records):
        train, val, test = split_dataset(records, seed=3)
        ids = [r.sample_id for r in train + val + test]
        assert sorted(ids) == [r.sample_id for r in records]
        assert len(set(ids)) == len(records)

    def test_stratified_per_class(self, records):
        train, val, test = split_dataset(records, seed=3)
        for part, per_class in ((train, 62), (val, 31), (test, 31)):
            counts = np.bincount([r.label.index for r in part], minlength=9)
            assert np.all(counts == per_class)

    def test_deterministic(self, records):
        a = split_dataset(records, seed=9)
        b = split_dataset(records, seed=9)
        for part_a, part_b in zip(a, b):
            assert [r.sample_id for r in part_a] == [r.sample_id for r in part_b]

    def test_odd_sizes_round_val_up(self):
        records = gen_dataset(ContactParams(), reps_per_cell=1)  # 31 per class
        train, val, test = split_dataset(records, seed=0)
        # per class: 15 train, then val gets ceil(16/2) = 8, test 8... 31-15=16
        assert (len(train), len(val), len(test)) == (135, 72, 72)


class TestDatasetFile:
    def test_roundtrip_quantized(self, tmp_path):
        records = gen_dataset(ContactParams(rng_seed=2), reps_per_cell=1)[:40]
        path = tmp_path / "d.txds"
        write_dataset(records, path)
        back = read_dataset(path)
        assert len(back) == 40
        for orig, loaded in zip(records, back):
            assert loaded.label == orig.label
            assert loaded.gripper_pos == orig.gripper_pos
            assert loaded.sample_id == orig.sample_id
            # stored bytes reproduce the quantization of the original forces
            assert np.array_equal(quantize_force(loaded.biframe.left.forces),
                                  quantize_force(orig.biframe.left.forces))

    def test_write_deterministic(self, tmp_path):
        records = gen_dataset(ContactParams(rng_seed=2), reps_per_cell=1)[:10]
        p1, p2 = tmp_path / "a.txds", tmp_path / "b.txds"
        write_dataset(records, p1)
        write_dataset(records, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.txds"
        path.write_bytes(b"NOPE" + bytes(20))
        with pytest.raises(DatasetFormatError):
            read_dataset(path)

    def test_truncated_rejected(self, tmp_path):
        records = gen_dataset(ContactParams(), reps_per_cell=1)[:5]
        path = tmp_path / "t.txds"
        write_dataset(records, path)
        path.write_bytes(path.read_bytes()[:-7])
        with pytest.raises(DatasetFormatError):
            read_dataset(path)

    def test_bad_label_rejected(self, tmp_path):
        records = gen_dataset(ContactParams(), reps_per_cell=1)[:1]
        path = tmp_path / "l.txds"
        write_dataset(records, path)
        blob = bytearray(path.read_bytes())
        blob[10] = 42  # first record's label byte
        path.write_bytes(bytes(blob))
        with pytest.raises(DatasetFormatError):
            read_dataset(path)
